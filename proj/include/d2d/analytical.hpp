#pragma once

// Semi-analytical coverage: interference Laplace transforms (intra- and
// inter-cluster), the Alzer-type coverage upper bounds for the three
// association models, the closed-form lower bound of the intra-LOS special
// case, and area spectral efficiency.
//
// Throughout, the Laplace argument s and the binomial index n only appear as
// the product t = n * s, so internal routines take t directly.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/errors.hpp"
#include "d2d/model.hpp"
#include "d2d/quadrature.hpp"
#include "d2d/special_functions.hpp"

namespace d2d {

struct CoverageFlags {
  /// Drop the conditioning on the cluster-centre distance (distances ~ Ra(r, 2 sigma^2)).
  bool use_assumption1 = false;
  /// Intra-cluster LOS interference only, no noise, every link LOS. Uniform model only.
  bool use_assumption2 = false;
};

/// eta = N (N!)^{-1/N}, the constant of the Gamma tail bound.
inline double gamma_bound_constant(int shape) {
  if (shape < 1) throw DomainError("gamma_bound_constant: shape must be >= 1");
  return shape * std::pow(std::tgamma(shape + 1.0), -1.0 / shape);
}

inline constexpr int kMaxNakagamiShape = 10;

namespace detail {

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Neumaier sum in order of decreasing magnitude; the alternating binomial sums
// cancel heavily.
inline double compensated_sum(std::span<double> terms) {
  std::sort(terms.begin(), terms.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  double sum = 0.0;
  double c = 0.0;
  for (double x : terms) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

// Tail cut in units of sigma beyond which a Rayleigh/Rician weight holds less
// than abs_tol / 10 of its mass.
inline double tail_cut(const QuadratureSpec& spec) {
  const double needed = std::sqrt(2.0 * std::log(10.0 / spec.abs_tol));
  return std::min(spec.tail_cutoff_sigmas, needed);
}

// Integrates over [lo, hi] split at geometrically spaced breakpoints so that
// mass concentrated near lo (nearest-neighbour densities) is resolved.
template <class F>
double integrate_split(F&& f, double lo, double hi, double first_width, const QuadratureSpec& spec,
                       const char* what) {
  if (!(hi > lo)) return 0.0;
  double total = 0.0;
  double a = lo;
  double width = std::max(first_width, (hi - lo) * 1e-3);
  while (a < hi) {
    const double b = std::min(hi, a + width);
    total += require_converged(integrate(f, a, b, spec), what);
    a = b;
    width *= 2.0;
  }
  return total;
}

}  // namespace detail

/// Laplace kernels of one interfering link. `los(t, r)` is the probability
/// weight exp(-eps r) times 1 - E_G[(1 + G t C_L r^{-alpha_L} / N_L)^{-N_L}];
/// `nlos` is the NLOS counterpart weighted by 1 - exp(-eps r).
class LaplaceKernel {
public:
  LaplaceKernel(const GainTable& table, const ChannelParams& channel) : table_(table), channel_(channel) {}

  double los_bracket(double t, double r) const {
    return bracket(t, r, channel_.intercept_los, channel_.alpha_los, channel_.nakagami_los);
  }
  double nlos_bracket(double t, double r) const {
    return bracket(t, r, channel_.intercept_nlos, channel_.alpha_nlos, channel_.nakagami_nlos);
  }
  double los(double t, double r) const { return los_bracket(t, r) * std::exp(-channel_.blockage_rate * r); }
  double nlos(double t, double r) const { return nlos_bracket(t, r) * -std::expm1(-channel_.blockage_rate * r); }
  double total(double t, double r) const {
    const double p_los = std::exp(-channel_.blockage_rate * r);
    return los_bracket(t, r) * p_los + nlos_bracket(t, r) * (1.0 - p_los);
  }

  const GainTable& table() const { return table_; }
  const ChannelParams& channel() const { return channel_; }

private:
  double bracket(double t, double r, double intercept, double alpha, int shape) const {
    if (t <= 0.0) return 0.0;
    const double base = t * intercept * std::pow(r, -alpha) / shape;
    double sum = 0.0;
    for (const auto& e : table_.entries) {
      if (e.probability == 0.0) continue;
      sum += e.probability * -std::expm1(-shape * std::log1p(e.gain * base));
    }
    return sum;
  }

  GainTable table_;
  ChannelParams channel_;
};

/// LOS kernel for Laplace argument s and binomial index n.
inline double kernel_los(double s, double r, int n, const GainTable& table, const ChannelParams& channel) {
  if (s < 0.0 || !(r > 0.0) || n < 1) throw DomainError("kernel_los: requires s >= 0, r > 0, n >= 1");
  return LaplaceKernel(table, channel).los(n * s, r);
}

/// NLOS kernel for Laplace argument s and binomial index n.
inline double kernel_nlos(double s, double r, int n, const GainTable& table, const ChannelParams& channel) {
  if (s < 0.0 || !(r > 0.0) || n < 1) throw DomainError("kernel_nlos: requires s >= 0, r > 0, n >= 1");
  return LaplaceKernel(table, channel).nlos(n * s, r);
}

/// Evaluates the per-interferer exponents of the Laplace transforms. One
/// instance per (config, gain table, tolerances); immutable and thread-safe.
class InterferenceIntegrals {
public:
  InterferenceIntegrals(const NetworkConfig& cfg, const GainTable& table, const QuadratureSpec& quad)
      : cfg_(cfg), kernel_(table, cfg.channel), quad_(quad), inner_(quad.nested()) {
    quad_.validate();
    sigma_ = cfg.scatter_std;
    variance_ = cfg.variance();
    cut_ = detail::tail_cut(inner_);
  }

  const LaplaceKernel& kernel() const { return kernel_; }
  const NetworkConfig& config() const { return cfg_; }
  const QuadratureSpec& quad() const { return quad_; }

  /// int (Q + Z)(t, w) Ri(w, v, sigma^2) dw over [lower, inf), untruncated density.
  double rician_total(double t, double v, double lower = 0.0) const {
    if (t <= 0.0) return 0.0;
    auto f = [&](double w) { return kernel_.total(t, w) * rician_pdf(w, v, variance_); };
    return over_rician(f, v, lower, "intra-cluster exponent");
  }

  /// int Q(t, w) Ri dw over [lower, inf).
  double rician_los(double t, double v, double lower = 0.0) const {
    if (t <= 0.0) return 0.0;
    auto f = [&](double w) { return kernel_.los(t, w) * rician_pdf(w, v, variance_); };
    return over_rician(f, v, lower, "LOS intra-cluster exponent");
  }

  /// int Z(t, w) Ri dw over [0, inf).
  double rician_nlos(double t, double v) const {
    if (t <= 0.0) return 0.0;
    auto f = [&](double w) { return kernel_.nlos(t, w) * rician_pdf(w, v, variance_); };
    return over_rician(f, v, 0.0, "NLOS intra-cluster exponent");
  }

  /// int Q_a(t, w) Ri dw (LOS bracket without the blockage weight).
  double rician_los_bracket(double t, double v) const {
    if (t <= 0.0) return 0.0;
    auto f = [&](double w) { return kernel_.los_bracket(t, w) * rician_pdf(w, v, variance_); };
    return over_rician(f, v, 0.0, "all-LOS intra-cluster exponent");
  }

  /// int (Q + Z)(t, w) Ra(w, 2 sigma^2) dw.
  double rayleigh_total(double t) const {
    if (t <= 0.0) return 0.0;
    auto f = [&](double w) { return kernel_.total(t, w) * rayleigh_pdf(w, 2.0 * variance_); };
    return over_rayleigh(f, "approximate intra-cluster exponent");
  }

  /// int Q_a(t, w) Ra(w, 2 sigma^2) dw.
  double rayleigh_los_bracket(double t) const {
    if (t <= 0.0) return 0.0;
    auto f = [&](double w) { return kernel_.los_bracket(t, w) * rayleigh_pdf(w, 2.0 * variance_); };
    return over_rayleigh(f, "approximate all-LOS intra-cluster exponent");
  }

  /// Exponent of the inter-cluster Laplace transform,
  /// 2 pi lambda_p int_0^inf (1 - exp(-s_bar g(t, v))) v dv.
  double inter_exponent(double t) const {
    if (t <= 0.0) return 0.0;
    const double s_bar = cfg_.mean_active;
    auto f = [&](double v) { return -std::expm1(-s_bar * rician_total(t, v)) * v; };
    const double scale = sigma_ + reach(t);
    const auto r = integrate_to_infinity(f, 0.0, scale, quad_);
    return 2.0 * std::numbers::pi * cfg_.parent_density * require_converged(r, "inter-cluster exponent");
  }

  /// Distance at which the strongest interferer's kernel is of order one
  /// (ignoring blockage); sets the length scale of the inter-cluster integral.
  double reach(double t) const {
    double g_max = 0.0;
    for (const auto& e : kernel_.table().entries) g_max = std::max(g_max, e.gain);
    const auto& ch = cfg_.channel;
    const double r_los = std::pow(g_max * t * ch.intercept_los / ch.nakagami_los, 1.0 / ch.alpha_los);
    const double r_nlos = std::pow(g_max * t * ch.intercept_nlos / ch.nakagami_nlos, 1.0 / ch.alpha_nlos);
    return std::max(r_nlos, std::min(r_los, 3.0 / ch.blockage_rate));
  }

private:
  template <class F>
  double over_rician(F& f, double v, double lower, const char* what) const {
    const double lo = std::max(lower, v - cut_ * sigma_);
    const double hi = v + cut_ * sigma_;
    if (!(hi > lo)) return 0.0;
    return detail::integrate_split(f, lo, hi, 0.5 * sigma_, inner_, what);
  }

  template <class F>
  double over_rayleigh(F& f, const char* what) const {
    const double hi = cut_ * std::sqrt(2.0) * sigma_;
    return detail::integrate_split(f, 0.0, hi, 0.5 * sigma_, inner_, what);
  }

  NetworkConfig cfg_;
  LaplaceKernel kernel_;
  QuadratureSpec quad_;
  QuadratureSpec inner_;
  double sigma_ = 0.0;
  double variance_ = 0.0;
  double cut_ = 0.0;
};

/// Inter-cluster Laplace transform tabulated over t = n s.
///
/// Stores ln(exponent) against ln t on a uniform grid and interpolates with a
/// natural cubic spline (ln h is linear in ln t at both ends). The spline error
/// is estimated from a second spline on every other node (error ~ step^4); the
/// step is halved until the estimate, measured on L = exp(-h), is within
/// tolerance. Built once, then read-only.
class InterLaplaceTable {
public:
  explicit InterLaplaceTable(const InterferenceIntegrals& integrals) { build(integrals); }

  /// Exponent h(t), L_inter(t) = exp(-h(t)).
  double exponent(double t) const {
    if (t <= 0.0) return 0.0;
    const double x = std::log(t);
    if (x <= x0_) return std::exp(log_h_.front() + end_slopes_[0] * (x - x0_));
    const double x_end = x0_ + step_ * static_cast<double>(log_h_.size() - 1);
    if (x >= x_end) return std::exp(log_h_.back() + end_slopes_[1] * (x - x_end));
    return std::exp(spline(log_h_, curvature_, x0_, step_, x));
  }

  double laplace(double t) const { return std::exp(-exponent(t)); }

  std::size_t size() const { return log_h_.size(); }
  double step() const { return step_; }

private:
  static constexpr double kNegligible = 1e-12;
  static constexpr double kSaturated = 40.0;
  static constexpr int kMaxHalvings = 4;

  void build(const InterferenceIntegrals& integrals) {
    const auto& quad = integrals.quad();
    auto direct = [&](double log_t) { return std::log(integrals.inter_exponent(std::exp(log_t))); };

    // bracket the range where L_inter moves between 1 - 1e-12 and e^-40
    const auto& ch = integrals.config().channel;
    const double sigma = integrals.config().scatter_std;
    double lo = std::log(std::pow(sigma, ch.alpha_los) / ch.intercept_los);
    double hi = lo;
    while (integrals.inter_exponent(std::exp(lo)) > kNegligible) lo -= std::log(10.0);
    while (integrals.inter_exponent(std::exp(hi)) < kSaturated) hi += std::log(10.0);

    x0_ = lo;
    const int intervals = std::max(2, static_cast<int>(std::ceil((hi - lo) / 0.5)));
    step_ = (hi - lo) / intervals;
    for (int i = 0; i <= intervals; ++i) log_h_.push_back(direct(lo + step_ * i));

    for (int halving = 0;; ++halving) {
      curvature_ = natural_spline(log_h_, step_);
      if (estimated_error() <= std::max(quad.abs_tol, 10.0 * quad.rel_tol) || halving == kMaxHalvings) break;
      std::vector<double> finer;
      finer.reserve(2 * log_h_.size() - 1);
      for (std::size_t i = 0; i + 1 < log_h_.size(); ++i) {
        finer.push_back(log_h_[i]);
        finer.push_back(direct(x0_ + step_ * (static_cast<double>(i) + 0.5)));
      }
      finer.push_back(log_h_.back());
      log_h_ = std::move(finer);
      step_ *= 0.5;
    }

    const std::size_t n = log_h_.size();
    end_slopes_[0] = (log_h_[1] - log_h_[0]) / step_ - step_ * (2.0 * curvature_[0] + curvature_[1]) / 6.0;
    end_slopes_[1] = (log_h_[n - 1] - log_h_[n - 2]) / step_ + step_ * (curvature_[n - 2] + 2.0 * curvature_[n - 1]) / 6.0;
  }

  // Largest |dL| between the spline through every other node and the skipped
  // nodes, scaled by 1/16 for the halved step.
  double estimated_error() const {
    std::vector<double> coarse;
    for (std::size_t i = 0; i < log_h_.size(); i += 2) coarse.push_back(log_h_[i]);
    if (coarse.size() < 3) return std::numeric_limits<double>::infinity();
    const auto m = natural_spline(coarse, 2.0 * step_);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < log_h_.size(); i += 2) {
      const double x = x0_ + step_ * static_cast<double>(i);
      const double exact = log_h_[i];
      const double h = std::exp(exact);
      const double dl = std::abs(std::expm1(spline(coarse, m, x0_, 2.0 * step_, x) - exact)) * h * std::exp(-h);
      worst = std::max(worst, dl);
    }
    return worst / 16.0;
  }

  // Second derivatives of the natural cubic spline through equally spaced y.
  static std::vector<double> natural_spline(const std::vector<double>& y, double step) {
    const std::size_t n = y.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    std::vector<double> c(n, 0.0);
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (step * step);
      const double denom = 4.0 - c[i - 1];
      c[i] = 1.0 / denom;
      d[i] = (rhs - d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = d[i] - c[i] * m[i + 1];
    }
    return m;
  }

  static double spline(const std::vector<double>& y, const std::vector<double>& m, double x0, double step,
                       double x) {
    const double pos = (x - x0) / step;
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    i = std::min(i, y.size() - 2);
    const double u = pos - static_cast<double>(i);
    const double w = 1.0 - u;
    return w * y[i] + u * y[i + 1] + step * step / 6.0 * ((w * w * w - w) * m[i] + (u * u * u - u) * m[i + 1]);
  }

  double x0_ = 0.0;
  double step_ = 0.5;
  std::vector<double> log_h_;
  std::vector<double> curvature_;
  std::array<double, 2> end_slopes_{};
};

namespace detail {

inline void check_shapes(const ChannelParams& ch) {
  if (ch.nakagami_los > kMaxNakagamiShape || ch.nakagami_nlos > kMaxNakagamiShape) {
    throw UsageError("Nakagami shapes above 10 make the alternating binomial sums unreliable");
  }
}

inline void check_flags(AssociationModel model, const CoverageFlags& flags) {
  if (flags.use_assumption2 && model != AssociationModel::Uniform) {
    throw UsageError("the intra-LOS special case is defined for the uniform model only");
  }
}

}  // namespace detail

/// n-th conditional Laplace transform of the intra-cluster interference at
/// Laplace argument s, given the cluster-centre distance v and (for the
/// nearest-transmitter models) the serving distance.
inline double laplace_intra(AssociationModel model, int n, double s, double v, std::optional<double> r_serving,
                            const CoverageFlags& flags, const NetworkConfig& cfg, const QuadratureSpec& quad = {}) {
  if (n < 1) throw DomainError("laplace_intra: n must be >= 1");
  if (s < 0.0) throw DomainError("laplace_intra: s must be >= 0");
  if (v < 0.0) throw DomainError("laplace_intra: v must be >= 0");
  detail::check_flags(model, flags);
  const bool needs_serving = model != AssociationModel::Uniform && !flags.use_assumption1;
  if (needs_serving && !r_serving) throw UsageError("laplace_intra: serving distance required for this model");
  if (r_serving && *r_serving < 0.0) throw DomainError("laplace_intra: negative serving distance");
  const double interferers = cfg.mean_active - 1.0;
  if (interferers <= 0.0 || s == 0.0) return 1.0;

  const InterferenceIntegrals integrals(cfg, cfg.gain_table(), quad);
  const double t = n * s;
  double exponent = 0.0;
  if (flags.use_assumption2) {
    exponent = flags.use_assumption1 ? integrals.rayleigh_los_bracket(t) : integrals.rician_los_bracket(t, v);
  } else if (flags.use_assumption1) {
    exponent = integrals.rayleigh_total(t);
  } else {
    switch (model) {
      case AssociationModel::Uniform:
        exponent = integrals.rician_total(t, v);
        break;
      case AssociationModel::Closest: {
        const double q = marcum_q1(v / cfg.scatter_std, *r_serving / cfg.scatter_std);
        if (q < 1e-300) throw DegenerateSupportError("laplace_intra: degenerate truncation", q);
        exponent = integrals.rician_total(t, v, *r_serving) / q;
        break;
      }
      case AssociationModel::ClosestLos: {
        const double q = marcum_q1(v / cfg.scatter_std, *r_serving / cfg.scatter_std);
        if (q < 1e-300) throw DegenerateSupportError("laplace_intra: degenerate truncation", q);
        exponent = integrals.rician_los(t, v, *r_serving) / q + integrals.rician_nlos(t, v);
        break;
      }
    }
  }
  return std::exp(-interferers * exponent);
}

/// n-th Laplace transform of the inter-cluster interference (same for all models).
inline double laplace_inter(int n, double s, const NetworkConfig& cfg, const QuadratureSpec& quad = {}) {
  if (n < 1) throw DomainError("laplace_inter: n must be >= 1");
  if (s < 0.0) throw DomainError("laplace_inter: s must be >= 0");
  if (s == 0.0) return 1.0;
  const InterferenceIntegrals integrals(cfg, cfg.gain_table(), quad);
  return std::exp(-integrals.inter_exponent(n * s));
}

/// Result of an analytical coverage evaluation.
struct CoverageResult {
  double value = 0.0;  // clamped to [0, 1]
  double raw = 0.0;    // as integrated
  bool is_upper_bound = true;
  std::string variant;
};

namespace detail {

class CoverageIntegrand {
public:
  CoverageIntegrand(AssociationModel model, double gamma_th, const CoverageFlags& flags,
                    const InterferenceIntegrals& integrals, const GainTable& table, const InterLaplaceTable* inter)
      : model_(model), flags_(flags), cfg_(integrals.config()), integrals_(integrals), inter_(inter) {
    const auto& cfg = cfg_;
    const auto& ch = cfg.channel;
    los_scale_ = gamma_th * gamma_bound_constant(ch.nakagami_los) / (ch.intercept_los * table.boresight);
    nlos_scale_ = gamma_th * gamma_bound_constant(ch.nakagami_nlos) / (ch.intercept_nlos * table.boresight);
    for (int n = 1; n <= ch.nakagami_los; ++n) {
      los_coeff_.push_back((n % 2 ? 1.0 : -1.0) * binomial(ch.nakagami_los, n));
    }
    for (int n = 1; n <= ch.nakagami_nlos; ++n) {
      nlos_coeff_.push_back((n % 2 ? 1.0 : -1.0) * binomial(ch.nakagami_nlos, n));
    }
  }

  /// Sum of the binomial terms (X + Y, X_L, or the special-case X) at serving
  /// distance r. `v` is ignored under assumption 1; `los_cdf` is the
  /// nearest-LOS table for this v (ClosestLos only).
  double terms(double r, double v) const {
    const auto& ch = cfg_.channel;
    const double interferers = cfg_.mean_active - 1.0;
    std::vector<double> parts;
    parts.reserve(los_coeff_.size() + nlos_coeff_.size());

    if (flags_.use_assumption2) {
      for (std::size_t k = 0; k < los_coeff_.size(); ++k) {
        const double t = (k + 1.0) * los_scale_ * std::pow(r, ch.alpha_los);
        const double g = flags_.use_assumption1 ? integrals_.rayleigh_los_bracket(t)
                                                : integrals_.rician_los_bracket(t, v);
        parts.push_back(los_coeff_[k] * std::exp(-interferers * g));
      }
      return compensated_sum(parts);
    }

    const double q_serving = serving_truncation(r, v);
    const bool los_only = model_ == AssociationModel::ClosestLos;
    const double p_los = los_only ? 1.0 : std::exp(-ch.blockage_rate * r);
    const double p_nlos = los_only ? 0.0 : -std::expm1(-ch.blockage_rate * r);

    for (std::size_t k = 0; k < los_coeff_.size(); ++k) {
      const double t = (k + 1.0) * los_scale_ * std::pow(r, ch.alpha_los);
      parts.push_back(los_coeff_[k] * p_los * factor(t, r, v, q_serving));
    }
    if (p_nlos > 0.0) {
      for (std::size_t k = 0; k < nlos_coeff_.size(); ++k) {
        const double t = (k + 1.0) * nlos_scale_ * std::pow(r, ch.alpha_nlos);
        parts.push_back(nlos_coeff_[k] * p_nlos * factor(t, r, v, q_serving));
      }
    }
    return compensated_sum(parts);
  }

  const InterferenceIntegrals& integrals() const { return integrals_; }

private:
  double serving_truncation(double r, double v) const {
    if (flags_.use_assumption1 || model_ == AssociationModel::Uniform) return 1.0;
    return marcum_q1(v / cfg_.scatter_std, r / cfg_.scatter_std);
  }

  // exp(-t sigma_n^2) * L_intra(t) * L_inter(t)
  double factor(double t, double r, double v, double q_serving) const {
    const double interferers = cfg_.mean_active - 1.0;
    double intra_exponent = 0.0;
    if (interferers > 0.0 && t > 0.0) {
      if (flags_.use_assumption1) {
        intra_exponent = integrals_.rayleigh_total(t);
      } else if (model_ == AssociationModel::Uniform) {
        intra_exponent = integrals_.rician_total(t, v);
      } else if (q_serving < 1e-300) {
        // serving distance beyond every other transmitter: no valid truncation,
        // the serving density itself is zero here
        return 0.0;
      } else if (model_ == AssociationModel::Closest) {
        intra_exponent = integrals_.rician_total(t, v, r) / q_serving;
      } else {
        intra_exponent = integrals_.rician_los(t, v, r) / q_serving + integrals_.rician_nlos(t, v);
      }
    }
    const double inter_exponent = inter_->exponent(t);
    return std::exp(-t * cfg_.noise_power - interferers * intra_exponent - inter_exponent);
  }

  AssociationModel model_;
  CoverageFlags flags_;
  const NetworkConfig& cfg_;
  const InterferenceIntegrals& integrals_;
  const InterLaplaceTable* inter_;
  double los_scale_ = 0.0;
  double nlos_scale_ = 0.0;
  std::vector<double> los_coeff_;
  std::vector<double> nlos_coeff_;
};

inline std::string variant_name(AssociationModel model, const CoverageFlags& flags) {
  std::string name(to_string(model));
  if (flags.use_assumption2) name += "+intra_los_only";
  if (flags.use_assumption1) name += "+unconditioned";
  return name;
}

}  // namespace detail

/// Analytical coverage for one network configuration. The gain table is
/// explicit so the boresight gain can move independently of the interference
/// gains. The inter-cluster table does not depend on the threshold or the
/// association model and is built on first use, then shared (thread-safe).
class CoverageEngine {
public:
  CoverageEngine(const NetworkConfig& cfg, const GainTable& table, const QuadratureSpec& quad = {})
      : table_(table), quad_(quad) {
    cfg.validate();
    quad.validate();
    detail::check_shapes(cfg.channel);
    integrals_ = std::make_unique<InterferenceIntegrals>(cfg, table, quad);
    once_ = std::make_unique<std::once_flag>();
  }

  explicit CoverageEngine(const NetworkConfig& cfg, const QuadratureSpec& quad = {})
      : CoverageEngine(cfg, cfg.gain_table(), quad) {}

  const NetworkConfig& config() const { return integrals_->config(); }

  const InterLaplaceTable& inter_table() const {
    std::call_once(*once_, [this] { inter_ = std::make_unique<InterLaplaceTable>(*integrals_); });
    return *inter_;
  }

  CoverageResult coverage(AssociationModel model, double gamma_th, const CoverageFlags& flags = {}) const;

private:
  GainTable table_;
  QuadratureSpec quad_;
  std::unique_ptr<InterferenceIntegrals> integrals_;
  std::unique_ptr<std::once_flag> once_;
  mutable std::unique_ptr<InterLaplaceTable> inter_;
};

inline CoverageResult CoverageEngine::coverage(AssociationModel model, double gamma_th,
                                               const CoverageFlags& flags) const {
  if (!(gamma_th > 0.0)) throw DomainError("coverage: gamma_th must be positive");
  detail::check_flags(model, flags);
  const NetworkConfig& cfg = config();
  const QuadratureSpec& quad = quad_;
  const InterLaplaceTable* inter = flags.use_assumption2 ? nullptr : &inter_table();
  const detail::CoverageIntegrand integrand(model, gamma_th, flags, *integrals_, table_, inter);
  const double sigma = cfg.scatter_std;
  const QuadratureSpec inner = quad.nested(0.3);
  const double cut = detail::tail_cut(inner);
  const int m = cfg.cluster_tx_count;

  double raw = 0.0;
  if (flags.use_assumption1) {
    const double var2 = 2.0 * cfg.variance();
    const double hi = cut * std::sqrt(var2);
    std::optional<LosDistanceCdf> los_cdf;
    if (model == AssociationModel::ClosestLos) los_cdf = LosDistanceCdf::unconditioned(cfg, quad.tail_cutoff_sigmas);
    auto f = [&](double r) {
      double weight = 0.0;
      switch (model) {
        case AssociationModel::Uniform: weight = rayleigh_pdf(r, var2); break;
        case AssociationModel::Closest:
          weight = m * std::exp(-(m - 1) * r * r / (4.0 * cfg.variance())) * rayleigh_pdf(r, var2);
          break;
        case AssociationModel::ClosestLos: weight = closest_los_serving_pdf(r, *los_cdf, m); break;
      }
      if (weight == 0.0) return 0.0;
      return weight * integrand.terms(r, 0.0);
    };
    raw = detail::integrate_split(f, 0.0, hi, 0.05 * sigma, quad, "coverage");
  } else {
    auto over_v = [&](double v) {
      const double fv = rayleigh_pdf(v, cfg.variance());
      if (fv == 0.0) return 0.0;
      std::optional<LosDistanceCdf> los_cdf;
      if (model == AssociationModel::ClosestLos) los_cdf = LosDistanceCdf::conditioned(cfg, v, quad.tail_cutoff_sigmas);
      auto over_r = [&](double r) {
        double weight = 0.0;
        switch (model) {
          case AssociationModel::Uniform: weight = rician_pdf(r, v, cfg.variance()); break;
          case AssociationModel::Closest: weight = serving_distance_pdf(model, r, v, cfg); break;
          case AssociationModel::ClosestLos: weight = closest_los_serving_pdf(r, *los_cdf, m); break;
        }
        if (weight == 0.0) return 0.0;
        return weight * integrand.terms(r, v);
      };
      const double lo = std::max(0.0, v - cut * sigma);
      const double hi = v + cut * sigma;
      const double first = model == AssociationModel::Uniform ? 0.5 * sigma : 0.05 * sigma;
      return fv * detail::integrate_split(over_r, lo, hi, first, inner, "coverage (serving distance)");
    };
    raw = detail::integrate_split(over_v, 0.0, cut * sigma, 0.5 * sigma, quad, "coverage (cluster centre)");
  }

  CoverageResult result;
  result.raw = raw;
  result.value = std::clamp(raw, 0.0, 1.0);
  result.is_upper_bound = true;
  result.variant = detail::variant_name(model, flags);
  return result;
}

/// Coverage upper bound with an explicit gain table.
inline CoverageResult coverage(AssociationModel model, double gamma_th, const CoverageFlags& flags,
                               const NetworkConfig& cfg, const GainTable& table, const QuadratureSpec& quad = {}) {
  return CoverageEngine(cfg, table, quad).coverage(model, gamma_th, flags);
}

/// Coverage upper bound for the configured network.
inline CoverageResult coverage(AssociationModel model, double gamma_th, const CoverageFlags& flags,
                               const NetworkConfig& cfg, const QuadratureSpec& quad = {}) {
  return coverage(model, gamma_th, flags, cfg, cfg.gain_table(), quad);
}

struct LowerBoundConstants {
  double xi = 0.0;   // sum_i b_i a_i^{2/alpha_L}
  double psi = 0.0;  // int_0^inf (1 - (1+y)^{-N_L}) y^{-2/alpha_L - 1} dy
};

/// psi(alpha_L, N_L). The y^{-2/alpha} singularity at 0 is removed by
/// y = u^{alpha/(alpha-2)} on [0, 1]; [1, inf) is mapped to a finite range.
inline double lower_bound_psi(double alpha_los, int nakagami_los) {
  if (!(alpha_los > 2.0)) {
    throw DomainError("closed-form lower bound needs alpha_L > 2 (the psi integral diverges otherwise)");
  }
  const double delta = 2.0 / alpha_los;
  const double power = alpha_los / (alpha_los - 2.0);
  auto body = [&](double y) { return -std::expm1(-nakagami_los * std::log1p(y)); };
  auto head = [&](double u) {
    if (u == 0.0) return 0.0;
    const double y = std::pow(u, power);
    // f(y) dy with y^{-delta-1} * power * u^{power-1} = power * u^{-1} * y^{-delta}
    return body(y) * power * std::pow(y, -delta) / u;
  };
  // y = t^{-1/delta} maps [1, inf) onto (0, 1] with unit Jacobian weight 1/delta
  auto tail = [&](double t) { return t == 0.0 ? 1.0 : body(std::pow(t, -1.0 / delta)); };
  QuadratureSpec spec;
  spec.abs_tol = 1e-13;
  spec.rel_tol = 1e-12;
  spec.max_subdivisions = 500;
  const double a = require_converged(integrate(head, 0.0, 1.0, spec), "psi head");
  const double b = require_converged(integrate(tail, 0.0, 1.0, spec), "psi tail") / delta;
  return a + b;
}

inline LowerBoundConstants lower_bound_constants(const GainTable& table, const ChannelParams& channel) {
  LowerBoundConstants c;
  for (const auto& e : table.entries) c.xi += e.probability * std::pow(e.gain, 2.0 / channel.alpha_los);
  c.psi = lower_bound_psi(channel.alpha_los, channel.nakagami_los);
  return c;
}

/// Closed-form lower bound of the uniform-model coverage in the intra-LOS special case.
inline double coverage_lower_bound(double gamma_th, const NetworkConfig& cfg, const GainTable& table) {
  if (!(gamma_th >= 0.0)) throw DomainError("coverage_lower_bound: gamma_th must be >= 0");
  const auto& ch = cfg.channel;
  detail::check_shapes(ch);
  const auto c = lower_bound_constants(table, ch);
  const double eta = gamma_bound_constant(ch.nakagami_los);
  const double delta = 2.0 / ch.alpha_los;
  const double prefactor = 2.0 * c.xi * c.psi * (cfg.mean_active - 1.0) / ch.alpha_los;
  std::vector<double> parts;
  for (int n = 1; n <= ch.nakagami_los; ++n) {
    const double x = std::pow(gamma_th * eta * n / (table.boresight * ch.nakagami_los), delta);
    parts.push_back((n % 2 ? 1.0 : -1.0) * detail::binomial(ch.nakagami_los, n) / (1.0 + prefactor * x));
  }
  return detail::compensated_sum(parts);
}

inline double coverage_lower_bound(double gamma_th, const NetworkConfig& cfg) {
  return coverage_lower_bound(gamma_th, cfg, cfg.gain_table());
}

/// Area spectral efficiency for a given coverage probability (bits/s/Hz/m^2).
inline double ase_from_coverage(double coverage_probability, double gamma_th, const NetworkConfig& cfg) {
  return cfg.mean_active * cfg.parent_density * std::log2(1.0 + gamma_th) * coverage_probability;
}

inline double ase(AssociationModel model, double gamma_th, const CoverageFlags& flags, const NetworkConfig& cfg,
                  const QuadratureSpec& quad = {}) {
  return ase_from_coverage(coverage(model, gamma_th, flags, cfg, quad).value, gamma_th, cfg);
}

struct AseOptimum {
  int mean_active = 1;
  double ase = 0.0;
  std::vector<double> curve;  // ASE at s_bar = 1..M
};

/// Exhaustive scan over s_bar = 1..M with a caller-supplied coverage
/// P(s_bar); ties go to the smaller s_bar.
inline AseOptimum optimize_mean_active(const NetworkConfig& cfg, double gamma_th,
                                       const std::function<double(int)>& coverage_at) {
  if (cfg.cluster_tx_count < 1) throw DomainError("optimize_mean_active: M must be >= 1");
  AseOptimum best;
  best.ase = -1.0;
  for (int s = 1; s <= cfg.cluster_tx_count; ++s) {
    NetworkConfig point = cfg;
    point.mean_active = s;
    const double value = ase_from_coverage(coverage_at(s), gamma_th, point);
    best.curve.push_back(value);
    if (value > best.ase) {
      best.ase = value;
      best.mean_active = s;
    }
  }
  return best;
}

inline AseOptimum optimize_mean_active(AssociationModel model, double gamma_th, const CoverageFlags& flags,
                                       const NetworkConfig& cfg, const QuadratureSpec& quad = {}) {
  return optimize_mean_active(cfg, gamma_th, [&](int s) {
    NetworkConfig point = cfg;
    point.mean_active = s;
    return coverage(model, gamma_th, flags, point, quad).value;
  });
}

/// Optimum for several thresholds at once; each s_bar builds one engine.
inline std::vector<AseOptimum> optimize_mean_active(AssociationModel model, std::span<const double> gammas,
                                                    const CoverageFlags& flags, const NetworkConfig& cfg,
                                                    const QuadratureSpec& quad = {}) {
  std::vector<std::vector<double>> by_gamma(gammas.size());
  for (int s = 1; s <= cfg.cluster_tx_count; ++s) {
    NetworkConfig point = cfg;
    point.mean_active = s;
    const CoverageEngine engine(point, quad);
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      by_gamma[j].push_back(engine.coverage(model, gammas[j], flags).value);
    }
  }
  std::vector<AseOptimum> out;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    out.push_back(optimize_mean_active(cfg, gammas[j], [&](int s) { return by_gamma[j][s - 1]; }));
  }
  return out;
}

}  // namespace d2d
