#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on finite and
// semi-infinite ranges. Every integral of the analytical engine goes through
// here, so tolerances and subdivision limits come from one QuadratureSpec.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "d2d/errors.hpp"

namespace d2d {

struct QuadratureSpec {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  /// Infinite limits of density-weighted integrals are cut this many scale
  /// lengths past the bulk of the weight density.
  double tail_cutoff_sigmas = 12.0;
  int max_subdivisions = 200;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
    if (!(tail_cutoff_sigmas >= 6.0)) throw DomainError("tail cutoff must be at least 6 scale lengths");
    if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
  }

  /// Tolerances for an integral nested inside one evaluated with *this.
  QuadratureSpec nested(double factor = 0.1) const {
    QuadratureSpec inner = *this;
    inner.abs_tol *= factor;
    inner.rel_tol *= factor;
    return inner;
  }
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the nodes kKronrodNodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b] (finite). Never throws on non-convergence; the
/// result carries `converged = false` and the best estimate instead.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  QuadResult result;
  if (a == b) return result;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::vector<detail::Panel> heap;
  heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + 1);
  auto by_error = [](const detail::Panel& l, const detail::Panel& r) { return l.error < r.error; };

  heap.push_back(detail::gauss_kronrod_15(f, a, b));
  double total = heap.front().value;
  double error = heap.front().error;

  int subdivisions = 1;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (subdivisions >= spec.max_subdivisions) {
      result.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // panel is at machine resolution; accept what we have
      result.converged = false;
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;
    }
    const detail::Panel left = detail::gauss_kronrod_15(f, worst.a, mid);
    const detail::Panel right = detail::gauss_kronrod_15(f, mid, worst.b);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
    ++subdivisions;

    // re-sum from scratch to avoid drift from repeated subtraction
    total = 0.0;
    error = 0.0;
    for (const auto& p : heap) {
      total += p.value;
      error += p.error;
    }
  }

  result.value = sign * total;
  result.abs_error = error;
  result.subdivisions = subdivisions;
  return result;
}

/// Integrates f over [a, inf) through x = a + scale * u / (1 - u).
/// `scale` should be the length over which f has most of its mass.
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, double scale, const QuadratureSpec& spec = {}) {
  auto mapped = [&](double u) {
    const double w = 1.0 - u;
    const double x = a + scale * u / w;
    const double jac = scale / (w * w);
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx * jac;
  };
  return integrate(mapped, 0.0, 1.0, spec);
}

/// Throwing wrapper used where a non-converged integral must abort evaluation.
inline double require_converged(const QuadResult& r, const char* what) {
  if (!r.converged) {
    throw NumericalError(std::string(what) + ": quadrature did not converge", r.value, r.abs_error);
  }
  return r.value;
}

}  // namespace d2d
