#pragma once

// Cross-validation suite: analytical engine vs independent oracles and the
// simulator. Each check reports a measured value against a tolerance; the
// report text depends only on the settings, never on timing or threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "d2d/analytical.hpp"
#include "d2d/config.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/sweep.hpp"

namespace d2d {

// ---------------------------------------------------------------------------
// Reference implementations that share no code with the library paths.

namespace oracle {

/// e^{-x} I0(x) by the trapezoid rule on (1/pi) int_0^pi exp(x (cos t - 1)) dt,
/// which converges geometrically for this periodic integrand.
inline double bessel_i0_scaled(double x, int panels = 4000) {
  const double h = std::numbers::pi / panels;
  double sum = 0.5 * (1.0 + std::exp(-2.0 * x));
  for (int k = 1; k < panels; ++k) sum += std::exp(x * (std::cos(k * h) - 1.0));
  return sum * h / std::numbers::pi;
}

inline double bessel_i0(double x) { return bessel_i0_scaled(x) * std::exp(x); }

/// Q1(a, b) = int_b^inf x exp(-(x - a)^2 / 2) [e^{-ax} I0(ax)] dx.
inline double marcum_q1(double a, double b) {
  auto f = [a](double x) {
    const double z = a * x;
    const double i0_scaled =
        z < 700.0 ? boost::math::cyl_bessel_i(0, z) * std::exp(-z) : 1.0 / std::sqrt(2.0 * std::numbers::pi * z);
    return x * std::exp(-0.5 * (x - a) * (x - a)) * i0_scaled;
  };
  const double peak = std::max(a, b);
  // split at the mode so the infinite panel starts on the decaying side
  double total = 0.0;
  if (peak > b) total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b, peak, 15, 1e-14);
  total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, peak, std::numeric_limits<double>::infinity(), 15, 1e-14);
  return total;
}

/// Integral of f over [a, inf) by adaptive Gauss-Kronrod (61 points).
template <class F>
double integrate(F f, double a, double b = std::numeric_limits<double>::infinity()) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

/// psi in closed form: (N / delta) Gamma(1 - delta) Gamma(N + delta) / Gamma(N + 1), delta = 2 / alpha.
inline double lower_bound_psi(double alpha, int shape) {
  const double delta = 2.0 / alpha;
  return shape / delta * std::tgamma(1.0 - delta) * std::tgamma(shape + delta) / std::tgamma(shape + 1.0);
}

}  // namespace oracle

// ---------------------------------------------------------------------------

struct CheckResult {
  std::string id;
  std::string description;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationSettings {
  std::uint64_t seed = 1;
  long n_trials = 10000;          // per Monte Carlo coverage point
  long laplace_trials = 100000;   // per Laplace oracle
  int threads = 1;
  double tol_scale = 1.0;         // multiplies every tolerance
  bool full = false;              // full grids instead of the reduced ones
  QuadratureSpec quad{};
};

namespace detail {

inline CheckResult at_most(std::string id, std::string description, double measured, double tolerance,
                           const ValidationSettings& vs) {
  const double tol = tolerance * vs.tol_scale;
  return {std::move(id), std::move(description), measured, tol, std::isfinite(measured) && measured <= tol};
}

// z-score of a - b for two independent proportions
inline double z_excess(double a, double b, double se_a, double se_b, long n) {
  const double se = std::max(std::hypot(se_a, se_b), 1.0 / static_cast<double>(n));
  return (a - b) / se;
}

inline NetworkConfig with(std::initializer_list<std::pair<const char*, double>> overrides) {
  ConfigSource source;
  for (const auto& [k, v] : overrides) source.set(k, v);
  return source.build();
}

}  // namespace detail

/// Every distance density integrates to its stated mass over a grid of 20 (sigma, v, M).
inline std::vector<CheckResult> check_pdf_normalization(const ValidationSettings& vs) {
  static constexpr double sigmas[] = {5.0, 10.0, 20.0, 40.0, 80.0};
  static constexpr double offsets[] = {0.0, 0.5, 1.5, 3.0};
  static constexpr int counts[] = {1, 2, 10, 40};
  double worst = 0.0;
  int combo = 0;
  for (double sigma : sigmas) {
    for (double k : offsets) {
      NetworkConfig cfg;
      cfg.scatter_std = sigma;
      cfg.cluster_tx_count = counts[combo++ % 4];
      cfg.mean_active = 1.0;
      const double v = k * sigma;
      const double var = cfg.variance();
      const double eps = cfg.channel.blockage_rate;
      const int m = cfg.cluster_tx_count;
      const double p_los =
          oracle::integrate([&](double r) { return std::exp(-eps * r) * rician_pdf(r, v, var); }, 0.0);
      const double p_los_approx =
          oracle::integrate([&](double r) { return std::exp(-eps * r) * rayleigh_pdf(r, 2.0 * var); }, 0.0);
      // every density below is negligible (< 1e-50) beyond v + 16 sigma
      const double upper = v + 16.0 * sigma;
      auto mass = [&](auto pdf, double lower = 0.0) { return oracle::integrate(pdf, lower, upper); };
      auto track = [&](double got, double expected) { worst = std::max(worst, std::abs(got - expected)); };

      track(oracle::integrate([&](double x) { return cluster_center_distance_pdf(x, cfg); }, 0.0), 1.0);
      for (auto model : kAllModels) {
        const double expected = model == AssociationModel::ClosestLos ? 1.0 - std::pow(1.0 - p_los, m) : 1.0;
        track(mass([&](double r) { return serving_distance_pdf(model, r, v, cfg); }), expected);
        const double expected_approx =
            model == AssociationModel::ClosestLos ? 1.0 - std::pow(1.0 - p_los_approx, m) : 1.0;
        track(oracle::integrate([&](double r) { return serving_distance_pdf_approx(model, r, cfg); }, 0.0),
              expected_approx);
        const double r_serving = sigma;
        track(mass([&](double s) { return interferer_distance_pdf(model, s, v, r_serving, cfg); },
                   model == AssociationModel::Uniform ? 0.0 : r_serving),
              1.0);
      }
    }
  }
  return {detail::at_most("AC1.pdf_normalization", "max |mass - expected mass| over 20 (sigma, v, M)", worst, 1e-6,
                          vs)};
}

/// I0 and Q1 against the reference implementations on 100-point grids.
inline std::vector<CheckResult> check_special_functions(const ValidationSettings& vs) {
  double worst_i0 = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double x = 0.5 * k;
    const double ref = oracle::bessel_i0(x);
    worst_i0 = std::max(worst_i0, std::abs(bessel_i0(x) - ref) / std::max(1.0, ref));
  }
  static constexpr double grid[] = {0.0, 0.3, 1.0, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0, 12.0};
  double worst_q = 0.0;
  for (double a : grid) {
    for (double b : grid) worst_q = std::max(worst_q, std::abs(marcum_q1(a, b) - oracle::marcum_q1(a, b)));
  }
  return {
      detail::at_most("AC2.bessel_i0", "max |I0 - ref| / max(1, ref), x in [0, 49.5]", worst_i0, 1e-9, vs),
      detail::at_most("AC2.marcum_q1", "max |Q1 - ref|, (a, b) in 10 x 10 grid on [0, 12]", worst_q, 1e-9, vs),
  };
}

/// Conditional Laplace transforms vs the simulator's Laplace oracle.
inline std::vector<CheckResult> check_laplace(const ValidationSettings& vs) {
  const NetworkConfig cfg;
  const LaplaceCondition cond{cfg.scatter_std, 0.75 * cfg.scatter_std};
  const std::vector<LaplacePoint> intra_points = {{1e5, 1}, {1e6, 1}, {1e6, 3}, {1e7, 2}, {1e8, 1}};
  const std::vector<LaplacePoint> inter_points = {{1e7, 1}, {1e8, 1}, {1e8, 3}, {1e9, 1}, {1e10, 1}};
  std::vector<CheckResult> out;
  for (auto model : kAllModels) {
    const auto est = laplace_oracle(cfg, model, InterferenceSource::Intra, intra_points, cond, vs.laplace_trials,
                                    vs.seed, vs.threads);
    double worst = 0.0;
    for (std::size_t i = 0; i < intra_points.size(); ++i) {
      const double a = laplace_intra(model, intra_points[i].n, intra_points[i].s, cond.center_distance,
                                     cond.serving_distance, {}, cfg, vs.quad);
      worst = std::max(worst, std::abs(a - est[i].mean) / std::max(est[i].standard_error, 1e-12));
    }
    out.push_back(detail::at_most("AC3.laplace_intra." + std::string(to_string(model)),
                                  "max |analytical - oracle| / SE over 5 (s, n)", worst, 3.0, vs));
  }
  const long inter_trials = vs.full ? vs.laplace_trials : std::max(1L, vs.laplace_trials / 5);
  const auto est = laplace_oracle(cfg, AssociationModel::Uniform, InterferenceSource::Inter, inter_points, {},
                                  inter_trials, vs.seed, vs.threads);
  double worst = 0.0;
  for (std::size_t i = 0; i < inter_points.size(); ++i) {
    const double a = laplace_inter(inter_points[i].n, inter_points[i].s, cfg, vs.quad);
    worst = std::max(worst, std::abs(a - est[i].mean) / std::max(est[i].standard_error, 1e-12));
  }
  out.push_back(detail::at_most("AC3.laplace_inter", "max |analytical - oracle| / SE over 5 (s, n)", worst, 3.0, vs));
  return out;
}

/// Coverage vs mean active count at sigma = 20, 20 dB: agreement and model ordering.
inline std::vector<CheckResult> check_coverage_agreement(const ValidationSettings& vs) {
  const std::vector<double> s_values = vs.full ? detail::range(1, 10, 1) : std::vector<double>{5.0};
  const double gamma = db_to_linear(20.0);
  const double thresholds[] = {gamma};
  double worst_gap = 0.0;
  double worst_order_analytical = -1.0;
  double worst_order_mc = -std::numeric_limits<double>::infinity();
  for (double s_bar : s_values) {
    const NetworkConfig cfg = detail::with({{"scatter_std", 20.0}, {"mean_active", s_bar}});
    const CoverageEngine engine(cfg, vs.quad);
    SimulationSettings sim;
    sim.n_trials = vs.n_trials;
    sim.seed = vs.seed;
    sim.threads = vs.threads;
    const auto mc = estimate_coverage_grid(cfg, kAllModels, thresholds, sim);
    double analytical[3];
    for (std::size_t m = 0; m < 3; ++m) {
      analytical[m] = engine.coverage(kAllModels[m], gamma).value;
      worst_gap = std::max(worst_gap, std::abs(analytical[m] - mc[m][0].p_hat));
    }
    // kAllModels is ordered Uniform, Closest, ClosestLos: each must not exceed the next
    for (std::size_t m = 0; m + 1 < 3; ++m) {
      worst_order_analytical = std::max(worst_order_analytical, analytical[m] - analytical[m + 1]);
      worst_order_mc = std::max(worst_order_mc, detail::z_excess(mc[m][0].p_hat, mc[m + 1][0].p_hat,
                                                                 mc[m][0].standard_error(),
                                                                 mc[m + 1][0].standard_error(), sim.n_trials));
    }
  }
  return {
      detail::at_most("AC4.analytical_vs_mc", "max |analytical - MC| over mean active x model", worst_gap, 0.05, vs),
      detail::at_most("AC4.order_analytical", "max P(weaker model) - P(stronger model), analytical",
                      worst_order_analytical, 1e-6, vs),
      detail::at_most("AC4.order_mc", "max (P(weaker) - P(stronger)) / SE, MC", worst_order_mc, 3.0, vs),
  };
}

/// Closed-form lower bound vs simulation of the intra-LOS-only network.
inline std::vector<CheckResult> check_lower_bound(const ValidationSettings& vs) {
  const NetworkConfig cfg = detail::with({{"frequency_preset", 60}, {"scatter_std", 10.0}, {"mean_active", 10.0}});
  const std::vector<double> gammas_db = detail::range(0, 40, 5);
  std::vector<double> gammas;
  for (double g : gammas_db) gammas.push_back(db_to_linear(g));
  SimulationSettings sim;
  sim.n_trials = vs.n_trials;
  sim.seed = vs.seed;
  sim.threads = vs.threads;
  sim.blockage = BlockageMode::all_los();
  sim.options.include_inter = false;
  sim.options.include_noise = false;
  const AssociationModel uniform[] = {AssociationModel::Uniform};
  const auto mc = estimate_coverage_grid(cfg, uniform, gammas, sim)[0];
  double worst_z = -std::numeric_limits<double>::infinity();
  double out_of_range = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double lb = coverage_lower_bound(gammas[i], cfg);
    if (!std::isfinite(lb) || lb < 0.0 || lb > 1.0) out_of_range += 1.0;
    worst_z = std::max(worst_z, detail::z_excess(lb, mc[i].p_hat, 0.0, mc[i].standard_error(), sim.n_trials));
  }
  return {
      detail::at_most("AC5.bound_below_mc", "max (lower bound - MC) / SE over 0..40 dB", worst_z, 3.0, vs),
      detail::at_most("AC5.bound_in_unit_interval", "points with a non-finite bound or one outside [0, 1]",
                      out_of_range, 0.0, vs),
  };
}

namespace detail {

// Smallest mean active count at which intra-only coverage drops below
// inter-only coverage; returns the sentinel when no crossing is seen.
inline double intra_inter_crossing(double sigma, const std::vector<double>& s_values, const ValidationSettings& vs,
                                   double* margin_at_one) {
  const double thresholds[] = {db_to_linear(10.0)};
  SinrOptions intra_only;
  intra_only.include_inter = false;
  SinrOptions inter_only;
  inter_only.include_intra = false;
  const SinrOptions variants[] = {intra_only, inter_only};
  const AssociationModel uniform[] = {AssociationModel::Uniform};
  for (double s_bar : s_values) {
    const NetworkConfig cfg = with({{"scatter_std", sigma}, {"mean_active", s_bar}});
    SimulationSettings sim;
    sim.n_trials = vs.n_trials;
    sim.seed = vs.seed;
    sim.threads = vs.threads;
    const auto est = estimate_coverage_variants(cfg, uniform, variants, thresholds, sim)[0];
    const double intra = est[0][0].p_hat;
    const double inter = est[1][0].p_hat;
    if (s_bar == 1.0 && margin_at_one) *margin_at_one = inter - intra;
    if (intra < inter) return s_bar;
  }
  return s_values.back() + 1.0;
}

}  // namespace detail

/// Intra-only vs inter-only coverage as clustering grows.
inline std::vector<CheckResult> check_exchange_number(const ValidationSettings& vs) {
  const std::vector<double> s_values = detail::range(1, vs.full ? 6 : 4, 1);
  double margin = std::numeric_limits<double>::quiet_NaN();
  const double crossing10 = detail::intra_inter_crossing(10.0, s_values, vs, &margin);
  const double crossing20 = detail::intra_inter_crossing(20.0, s_values, vs, nullptr);
  return {
      detail::at_most("AC6.intra_above_inter_at_1", "P(inter-only) - P(intra-only) at mean active 1, sigma 10",
                      margin, -1e-12, vs),
      detail::at_most("AC6.crossing_sigma10", "first mean active with intra-only below inter-only, sigma 10",
                      crossing10, 3.0, vs),
      detail::at_most("AC6.crossing_nondecreasing", "crossing(sigma 10) - crossing(sigma 20)",
                      crossing10 - crossing20, 0.0, vs),
  };
}

/// i.i.d. exponential blockage vs the LOS ball of equal median LOS distance.
inline std::vector<CheckResult> check_blockage_models(const ValidationSettings& vs) {
  const std::vector<double> s_values = vs.full ? detail::range(4, 10, 1) : std::vector<double>{6.0};
  const double thresholds[] = {db_to_linear(10.0)};
  const AssociationModel uniform[] = {AssociationModel::Uniform};
  double worst = 0.0;
  for (double s_bar : s_values) {
    const NetworkConfig cfg = detail::with({{"scatter_std", 10.0}, {"mean_active", s_bar}});
    SimulationSettings sim;
    sim.n_trials = vs.n_trials;
    sim.seed = vs.seed;
    sim.threads = vs.threads;
    const double iid = estimate_coverage_grid(cfg, uniform, thresholds, sim)[0][0].p_hat;
    sim.blockage = BlockageMode::los_ball_median(cfg.channel);
    const double ball = estimate_coverage_grid(cfg, uniform, thresholds, sim)[0][0].p_hat;
    worst = std::max(worst, std::abs(iid - ball));
  }
  return {detail::at_most("AC7.iid_vs_los_ball", "max |P(iid) - P(LOS ball)| over mean active", worst, 0.03, vs)};
}

/// Contribution of NLOS interference at the default channel.
inline std::vector<CheckResult> check_nlos_negligible(const ValidationSettings& vs) {
  const std::vector<double> s_values = vs.full ? detail::range(1, 10, 1) : std::vector<double>{2.0, 5.0};
  const double thresholds[] = {db_to_linear(20.0)};
  SinrOptions full;
  SinrOptions los_only;
  los_only.include_nlos_interference = false;
  SinrOptions nlos_only;
  nlos_only.include_los_interference = false;
  SinrOptions none;
  none.include_intra = false;
  none.include_inter = false;
  const SinrOptions variants[] = {full, los_only, nlos_only, none};
  double worst_los = 0.0;
  double worst_nlos = 0.0;
  for (double s_bar : s_values) {
    const NetworkConfig cfg = detail::with({{"scatter_std", 20.0}, {"mean_active", s_bar}});
    SimulationSettings sim;
    sim.n_trials = vs.n_trials;
    sim.seed = vs.seed;
    sim.threads = vs.threads;
    const auto est = estimate_coverage_variants(cfg, kAllModels, variants, thresholds, sim);
    for (const auto& by_model : est) {
      worst_los = std::max(worst_los, std::abs(by_model[1][0].p_hat - by_model[0][0].p_hat));
      worst_nlos = std::max(worst_nlos, std::abs(by_model[2][0].p_hat - by_model[3][0].p_hat));
    }
  }
  return {
      detail::at_most("AC8.los_only_vs_full", "max |P(LOS interference only) - P(full)|", worst_los, 0.02, vs),
      detail::at_most("AC8.nlos_only_vs_none", "max |P(NLOS interference only) - P(no interference)|", worst_nlos,
                      0.02, vs),
  };
}

/// Analytical coverage monotone in mean active count, threshold and boresight gain.
inline std::vector<CheckResult> check_monotonicity(const ValidationSettings& vs) {
  const std::vector<double> s_values = vs.full ? std::vector<double>{1, 3, 5, 8, 12} : std::vector<double>{1, 5, 12};
  const std::vector<double> gammas_db = vs.full ? std::vector<double>{0, 10, 20, 30, 40}
                                                : std::vector<double>{0, 20, 40};
  const std::vector<double> gain_scale = vs.full ? std::vector<double>{1.0, 2.0, 4.0} : std::vector<double>{1.0, 4.0};
  CoverageFlags flags;
  flags.use_assumption1 = !vs.full;
  const std::size_t ns = s_values.size();
  const std::size_t ng = gammas_db.size();
  const std::size_t nb = gain_scale.size();
  std::vector<double> p(ns * ng * nb);
  auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> double& { return p[(i * ng + j) * nb + k]; };
  for (std::size_t i = 0; i < ns; ++i) {
    const NetworkConfig cfg = detail::with({{"mean_active", s_values[i]}});
    for (std::size_t k = 0; k < nb; ++k) {
      GainTable table = cfg.gain_table();
      table.boresight *= gain_scale[k];
      const CoverageEngine engine(cfg, table, vs.quad);
      for (std::size_t j = 0; j < ng; ++j) {
        at(i, j, k) = engine.coverage(AssociationModel::Uniform, db_to_linear(gammas_db[j]), flags).value;
      }
    }
  }
  double worst_s = -1.0;
  double worst_g = -1.0;
  double worst_b = -1.0;
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      for (std::size_t k = 0; k < nb; ++k) {
        if (i + 1 < ns) worst_s = std::max(worst_s, at(i + 1, j, k) - at(i, j, k));
        if (j + 1 < ng) worst_g = std::max(worst_g, at(i, j + 1, k) - at(i, j, k));
        if (k + 1 < nb) worst_b = std::max(worst_b, at(i, j, k) - at(i, j, k + 1));
      }
    }
  }
  return {
      detail::at_most("AC9.nonincreasing_mean_active", "max increase of coverage with mean active", worst_s, 1e-6, vs),
      detail::at_most("AC9.nonincreasing_threshold", "max increase of coverage with threshold", worst_g, 1e-6, vs),
      detail::at_most("AC9.nondecreasing_boresight", "max decrease of coverage with boresight gain", worst_b, 1e-6,
                      vs),
  };
}

/// ASE-optimal mean active count at 10 and 20 dB.
inline std::vector<CheckResult> check_ase_optimum(const ValidationSettings& vs) {
  const NetworkConfig cfg;
  const double gammas[] = {db_to_linear(10.0), db_to_linear(20.0)};
  CoverageFlags flags;
  flags.use_assumption1 = !vs.full;
  std::vector<AssociationModel> models = {AssociationModel::Uniform};
  QuadratureSpec quad = vs.quad;
  if (vs.full) {
    models = {kAllModels.begin(), kAllModels.end()};
  } else {
    quad.rel_tol = std::max(quad.rel_tol, 1e-4);
    quad.abs_tol = std::max(quad.abs_tol, 1e-6);
  }
  double interior = 0.0;
  double worst_shift = -std::numeric_limits<double>::infinity();
  for (auto model : models) {
    const auto opt = optimize_mean_active(model, gammas, flags, cfg, quad);
    for (const auto& o : opt) {
      if (o.mean_active > 1 && o.mean_active < cfg.cluster_tx_count) interior = 1.0;
    }
    worst_shift = std::max(worst_shift, static_cast<double>(opt[1].mean_active - opt[0].mean_active));
  }
  return {
      detail::at_most("AC10.interior_optimum", "1 - [some model has 1 < s* < M]", 1.0 - interior, 0.0, vs),
      detail::at_most("AC10.optimum_shift", "max s*(20 dB) - s*(10 dB) over models", worst_shift, 0.0, vs),
  };
}

/// Intra-LOS-only, noise-free coverage does not depend on the array size.
inline std::vector<CheckResult> check_array_size_invariance(const ValidationSettings& vs) {
  const double thresholds[] = {db_to_linear(20.0)};
  const AssociationModel uniform[] = {AssociationModel::Uniform};
  CoverageEstimate est[2];
  const int sizes[] = {10, 40};
  for (int i = 0; i < 2; ++i) {
    const NetworkConfig cfg = detail::with({{"antenna_elements", static_cast<double>(sizes[i])}});
    SimulationSettings sim;
    sim.n_trials = vs.n_trials;
    // independent streams so the comparison is not trivially exact
    sim.seed = vs.seed + 1 + static_cast<std::uint64_t>(i);
    sim.threads = vs.threads;
    sim.blockage = BlockageMode::all_los();
    sim.options.include_inter = false;
    sim.options.include_noise = false;
    est[i] = estimate_coverage_grid(cfg, uniform, thresholds, sim)[0][0];
  }
  const double z = std::abs(
      detail::z_excess(est[0].p_hat, est[1].p_hat, est[0].standard_error(), est[1].standard_error(), vs.n_trials));
  return {detail::at_most("AC11.array_size_invariance", "|P(N_a = 10) - P(N_a = 40)| / SE", z, 3.0, vs)};
}

/// A sweep gives identical CSV with one and eight worker threads.
inline std::vector<CheckResult> check_sweep_determinism(const ValidationSettings& vs) {
  SweepSpec spec = figure_spec("2a");
  spec.values = {2.0, 6.0};
  spec.engines = {Engine::MonteCarlo};
  SweepSettings settings;
  settings.n_trials = std::min(vs.n_trials, 5000L);
  settings.seed = vs.seed;
  std::string csv[2];
  const int threads[] = {1, 8};
  for (int i = 0; i < 2; ++i) {
    settings.threads = threads[i];
    std::ostringstream out;
    write_sweep_csv(out, run_sweep(ConfigSource{}, spec, settings));
    csv[i] = out.str();
  }
  return {detail::at_most("AC12.sweep_threads", "CSV differs between 1 and 8 threads (0 = identical)",
                          csv[0] == csv[1] ? 0.0 : 1.0, 0.0, vs)};
}

struct ValidationCheck {
  const char* name;
  std::vector<CheckResult> (*run)(const ValidationSettings&);
};

inline const std::vector<ValidationCheck>& validation_checks() {
  static const std::vector<ValidationCheck> checks = {
      {"pdf_normalization", check_pdf_normalization},   {"special_functions", check_special_functions},
      {"laplace", check_laplace},                       {"coverage_agreement", check_coverage_agreement},
      {"lower_bound", check_lower_bound},               {"exchange_number", check_exchange_number},
      {"blockage_models", check_blockage_models},       {"nlos_negligible", check_nlos_negligible},
      {"monotonicity", check_monotonicity},             {"ase_optimum", check_ase_optimum},
      {"array_size_invariance", check_array_size_invariance}, {"sweep_determinism", check_sweep_determinism},
  };
  return checks;
}

/// Runs one group, turning a thrown error into a failed check.
inline std::vector<CheckResult> run_check(const ValidationCheck& check, const ValidationSettings& vs) {
  try {
    return check.run(vs);
  } catch (const std::exception& ex) {
    return {{std::string(check.name), std::string("error: ") + ex.what(),
             std::numeric_limits<double>::quiet_NaN(), 0.0, false}};
  }
}

inline std::vector<CheckResult> run_validation(const ValidationSettings& vs) {
  std::vector<CheckResult> all;
  for (const auto& check : validation_checks()) {
    auto part = run_check(check, vs);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

inline std::string format_check(const CheckResult& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "[%s] %-36s measured %-14.6g tolerance %-10.6g %s", c.pass ? "PASS" : "FAIL",
                c.id.c_str(), c.measured, c.tolerance, c.description.c_str());
  return buf;
}

inline std::string format_report(const std::vector<CheckResult>& results, const ValidationSettings& vs) {
  std::ostringstream out;
  out << "validation report\n";
  out << "seed " << vs.seed << ", trials " << vs.n_trials << ", laplace trials " << vs.laplace_trials
      << ", grids " << (vs.full ? "full" : "reduced") << ", tolerance scale " << format_number(vs.tol_scale)
      << "\n";
  std::size_t passed = 0;
  for (const auto& c : results) {
    out << format_check(c) << '\n';
    if (c.pass) ++passed;
  }
  out << passed << " of " << results.size() << " checks passed\n";
  return out.str();
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& c) { return c.pass; });
}

}  // namespace d2d
