#include <gtest/gtest.h>

#include <cmath>

#include "d2d/special_functions.hpp"
#include "d2d/validation.hpp"

using namespace d2d;

TEST(BesselI0, KnownValues) {
  EXPECT_DOUBLE_EQ(bessel_i0(0.0), 1.0);
  EXPECT_NEAR(bessel_i0(1.0), 1.2660658777520084, 1e-15);
  EXPECT_NEAR(bessel_i0(10.0) / 2815.716628466254, 1.0, 1e-14);
}

TEST(BesselI0, MatchesTrapezoidOracleAcrossSeriesAndAsymptoticBranches) {
  for (double x = 0.0; x <= 60.0; x += 0.37) {
    const double ref = oracle::bessel_i0_scaled(x);
    EXPECT_NEAR(bessel_i0_scaled(x), ref, 1e-13 * std::max(1.0, ref)) << "x = " << x;
  }
}

TEST(BesselI0, ContinuousAtBranchSwitch) {
  const double below = bessel_i0_scaled(std::nextafter(detail::kBesselSeriesLimit, 0.0));
  const double at = bessel_i0_scaled(detail::kBesselSeriesLimit);
  EXPECT_NEAR(below, at, 1e-14);
}

TEST(BesselI0, ScaledFormStaysFiniteForHugeArguments) {
  const double x = 1e6;
  EXPECT_TRUE(std::isfinite(bessel_i0_scaled(x)));
  EXPECT_NEAR(bessel_i0_scaled(x) * std::sqrt(2.0 * std::numbers::pi * x), 1.0, 1e-6);
}

TEST(BesselI0, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(bessel_i0(-1.0), DomainError);
  EXPECT_THROW(bessel_i0(std::nan("")), DomainError);
}

TEST(MarcumQ1, ClosedFormEdges) {
  EXPECT_DOUBLE_EQ(marcum_q1(3.0, 0.0), 1.0);
  for (double b : {0.1, 1.0, 2.5, 6.0}) EXPECT_NEAR(marcum_q1(0.0, b), std::exp(-0.5 * b * b), 1e-15);
}

TEST(MarcumQ1, MatchesQuadratureOracle) {
  for (double a : {0.2, 1.0, 3.0, 7.5, 15.0}) {
    for (double b : {0.5, 2.0, 4.0, 8.0, 16.0}) {
      EXPECT_NEAR(marcum_q1(a, b), oracle::marcum_q1(a, b), 1e-11) << a << ", " << b;
    }
  }
}

TEST(MarcumQ1, MonotoneInBothArguments) {
  double prev = 1.0;
  for (double b = 0.0; b < 10.0; b += 0.25) {
    const double q = marcum_q1(2.0, b);
    EXPECT_LE(q, prev + 1e-15);
    prev = q;
  }
  prev = 0.0;
  for (double a = 0.0; a < 10.0; a += 0.25) {
    const double q = marcum_q1(a, 3.0);
    EXPECT_GE(q, prev - 1e-15);
    prev = q;
  }
}

TEST(MarcumQ1, LargeArgumentsStayInUnitInterval) {
  const double q = marcum_q1(300.0, 290.0);
  EXPECT_GT(q, 0.999);
  EXPECT_LE(q, 1.0);
  EXPECT_LT(marcum_q1(300.0, 320.0), 1e-20);
}

TEST(Densities, RicianWithZeroOffsetIsRayleigh) {
  for (double x : {0.0, 1.0, 7.0, 30.0}) EXPECT_NEAR(rician_pdf(x, 0.0, 25.0), rayleigh_pdf(x, 25.0), 1e-16);
}

TEST(Densities, RicianMatchesDirectFormWhereNoOverflow) {
  const double var = 4.0;
  for (double x : {0.5, 2.0, 5.0}) {
    for (double y : {0.5, 3.0}) {
      const double direct = x / var * std::exp(-(x * x + y * y) / (2 * var)) * boost::math::cyl_bessel_i(0, x * y / var);
      EXPECT_NEAR(rician_pdf(x, y, var), direct, 1e-15);
    }
  }
}

TEST(Densities, RicianFarFromOriginDoesNotOverflow) {
  const double p = rician_pdf(1000.0, 1000.0, 1.0);
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_NEAR(p, std::sqrt(1.0 / (2.0 * std::numbers::pi)), 1e-3);
}

TEST(Densities, DomainChecks) {
  EXPECT_THROW(rayleigh_pdf(-1.0, 1.0), DomainError);
  EXPECT_THROW(rician_pdf(1.0, -1.0, 1.0), DomainError);
  EXPECT_THROW(rayleigh_pdf(1.0, 0.0), DomainError);
  EXPECT_THROW(PositiveReal(std::numeric_limits<double>::infinity()), DomainError);
}
