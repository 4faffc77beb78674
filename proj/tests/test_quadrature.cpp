#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "d2d/quadrature.hpp"

using namespace d2d;

TEST(Quadrature, PolynomialExactOnOnePanel) {
  // GK15 integrates degree-22 polynomials exactly
  const auto r = integrate([](double x) { return std::pow(x, 10) - 3 * x * x + 1; }, -1.0, 2.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, (std::pow(2.0, 11) + 1.0) / 11.0 - (8.0 + 1.0) + 3.0, 1e-11);
  EXPECT_EQ(r.subdivisions, 1);
}

TEST(Quadrature, SmoothIntegrals) {
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value, 2.0, 1e-12);
  EXPECT_NEAR(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0).value, 2.0 / 3.0, 1e-7);
}

TEST(Quadrature, ReversedLimitsFlipSign) {
  const auto f = [](double x) { return std::exp(x); };
  EXPECT_NEAR(integrate(f, 1.0, 0.0).value, -(std::exp(1.0) - 1.0), 1e-12);
  EXPECT_EQ(integrate(f, 2.0, 2.0).value, 0.0);
}

TEST(Quadrature, SemiInfinite) {
  EXPECT_NEAR(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0, 1.0).value, 1.0, 1e-9);
  const double half_gauss =
      integrate_to_infinity([](double x) { return std::exp(-x * x / 200.0); }, 0.0, 10.0).value;
  EXPECT_NEAR(half_gauss, std::sqrt(2.0 * std::numbers::pi) * 10.0 / 2.0, 1e-7);
}

TEST(Quadrature, ReportsNonConvergenceInsteadOfThrowing) {
  QuadratureSpec spec;
  spec.max_subdivisions = 2;
  spec.abs_tol = 1e-14;
  spec.rel_tol = 1e-14;
  const auto r = integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, spec);
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(require_converged(r, "oscillatory"), NumericalError);
  try {
    require_converged(r, "oscillatory");
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.estimate(), r.value);
    EXPECT_GT(e.error_bound(), 0.0);
  }
}

TEST(Quadrature, SpecValidation) {
  QuadratureSpec spec;
  EXPECT_NO_THROW(spec.validate());
  spec.abs_tol = 0.0;
  EXPECT_THROW(spec.validate(), DomainError);
  spec = {};
  spec.tail_cutoff_sigmas = 3.0;
  EXPECT_THROW(spec.validate(), DomainError);
  const auto inner = QuadratureSpec{}.nested(0.1);
  EXPECT_DOUBLE_EQ(inner.abs_tol, 1e-9);
  EXPECT_DOUBLE_EQ(inner.rel_tol, 1e-7);
}
