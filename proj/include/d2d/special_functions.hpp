#pragma once

// Modified Bessel I0, first-order Marcum Q and the Rayleigh/Rician densities
// used throughout the distance-distribution and coverage code.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "d2d/errors.hpp"

namespace d2d {

/// Strictly positive finite real. Used for variances, scatter and rates.
class PositiveReal {
public:
  PositiveReal(double value) : value_(value) {  // NOLINT: implicit by intent
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw DomainError("expected a positive finite value, got " + std::to_string(value));
    }
  }

  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }  // NOLINT

private:
  double value_;
};

namespace detail {

inline constexpr double kBesselSeriesLimit = 15.0;

inline void require_finite_nonnegative(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
  if (x < 0.0) throw DomainError(std::string(what) + ": negative argument");
}

// sum_k (x^2/4)^k / (k!)^2; all terms positive.
inline double bessel_i0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// sqrt(2 pi x) e^{-x} I0(x) by the Hankel asymptotic series, truncated at its
// smallest term.
inline double bessel_i0_asymptotic_factor(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * odd * odd / (8.0 * k * x);
    if (next > term) break;
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

}  // namespace detail

/// Exponentially scaled Bessel function exp(-x) * I0(x), x >= 0.
inline double bessel_i0_scaled(double x) {
  detail::require_finite_nonnegative(x, "bessel_i0_scaled");
  if (x < detail::kBesselSeriesLimit) return detail::bessel_i0_series(x) * std::exp(-x);
  return detail::bessel_i0_asymptotic_factor(x) / std::sqrt(2.0 * std::numbers::pi * x);
}

/// Modified Bessel function of the first kind, order zero, x >= 0.
/// Overflows to +inf beyond x ~ 713; use bessel_i0_scaled there.
inline double bessel_i0(double x) {
  detail::require_finite_nonnegative(x, "bessel_i0");
  if (x < detail::kBesselSeriesLimit) return detail::bessel_i0_series(x);
  return std::exp(x) * detail::bessel_i0_asymptotic_factor(x) / std::sqrt(2.0 * std::numbers::pi * x);
}

/// First-order Marcum Q function
///   Q1(a, b) = int_b^inf t exp(-(t^2 + a^2)/2) I0(a t) dt.
///
/// Evaluated as the Poisson mixture sum_k Pois(k; a^2/2) * Gamma_Q(k+1, b^2/2),
/// starting from the regularised upper incomplete gamma at the low end of the
/// Poisson window and accumulating with log-space Poisson increments, so the
/// result stays accurate for a up to several hundred.
inline double marcum_q1(double a, double b) {
  detail::require_finite_nonnegative(a, "marcum_q1");
  detail::require_finite_nonnegative(b, "marcum_q1");
  if (b == 0.0) return 1.0;
  const double x = 0.5 * a * a;
  const double y = 0.5 * b * b;
  if (x == 0.0) return std::exp(-y);

  const double spread = 12.0 * std::sqrt(x) + 12.0;
  const long k_lo = static_cast<long>(std::max(0.0, std::floor(x - spread)));
  const long k_hi = static_cast<long>(std::ceil(x + spread));
  const double log_x = std::log(x);
  const double log_y = std::log(y);

  double log_p = -x + static_cast<double>(k_lo) * log_x - std::lgamma(static_cast<double>(k_lo) + 1.0);
  double log_q = -y + static_cast<double>(k_lo) * log_y - std::lgamma(static_cast<double>(k_lo) + 1.0);
  double tail = boost::math::gamma_q(static_cast<double>(k_lo) + 1.0, y);

  double sum = 0.0;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double weight = std::exp(log_p);
    sum += weight * tail;
    if (static_cast<double>(k) > x && weight < 1e-20 * sum) break;
    const double next = static_cast<double>(k + 1);
    log_p += log_x - std::log(next);
    log_q += log_y - std::log(next);
    tail += std::exp(log_q);
  }
  return std::min(1.0, sum);
}

/// Rayleigh density Ra(x, variance) = (x / variance) exp(-x^2 / (2 variance)).
inline double rayleigh_pdf(double x, PositiveReal variance) {
  if (std::isnan(x) || x < 0.0) throw DomainError("rayleigh_pdf: negative distance");
  const double v = variance;
  return (x / v) * std::exp(-x * x / (2.0 * v));
}

/// Rician density Ri(x, y, variance) = (x/variance) exp(-(x^2+y^2)/(2 variance)) I0(x y / variance),
/// evaluated through the scaled Bessel form so it never overflows.
inline double rician_pdf(double x, double y, PositiveReal variance) {
  if (std::isnan(x) || x < 0.0) throw DomainError("rician_pdf: negative distance");
  if (std::isnan(y) || y < 0.0) throw DomainError("rician_pdf: negative offset");
  const double v = variance;
  const double d = x - y;
  return (x / v) * std::exp(-d * d / (2.0 * v)) * bessel_i0_scaled(x * y / v);
}

}  // namespace d2d
