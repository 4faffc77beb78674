#pragma once

// Monte Carlo simulator of the clustered network seen from a typical user at
// the origin. Every trial draws from its own RNG stream keyed by
// (seed, trial index), and per-chunk partial results are reduced in chunk
// order, so estimates do not depend on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "d2d/errors.hpp"
#include "d2d/model.hpp"
#include "d2d/parallel.hpp"

namespace d2d {

/// splitmix64 generator; one instance per trial.
class TrialRng {
public:
  using result_type = std::uint64_t;

  TrialRng(std::uint64_t seed, std::uint64_t trial) : state_(mix(seed ^ mix(trial + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

struct BlockageMode {
  enum class Kind { IidExponential, LosBall, AllLos };

  Kind kind = Kind::IidExponential;
  double radius = 0.0;  // LosBall only

  static BlockageMode iid_exponential() { return {Kind::IidExponential, 0.0}; }
  static BlockageMode los_ball(double radius) {
    if (!(radius > 0.0)) throw DomainError("LOS ball radius must be positive");
    return {Kind::LosBall, radius};
  }
  /// Radius at which the exponential law gives LOS probability one half.
  static BlockageMode los_ball_median(const ChannelParams& ch) { return los_ball(std::numbers::ln2 / ch.blockage_rate); }
  static BlockageMode all_los() { return {Kind::AllLos, 0.0}; }

  /// `u` is a uniform draw; consumed only by the random mode.
  bool is_los(double d, double u, const ChannelParams& ch) const {
    switch (kind) {
      case Kind::IidExponential: return u < std::exp(-ch.blockage_rate * d);
      case Kind::LosBall: return d <= radius;
      case Kind::AllLos: return true;
    }
    return true;
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

/// One link from a transmitter to the typical user.
struct Link {
  double distance = 0.0;
  bool los = true;
  double gain = 0.0;    // directivity gain if the link interferes
  double fading = 1.0;  // unit-mean Gamma power
  double power = 0.0;   // gain * fading * path loss (as an interferer)
};

/// One sampled network. The typical cluster holds M candidate transmitters;
/// which one serves depends on the association model, while everything drawn
/// here does not, so one realization can be evaluated under every model.
struct NetworkRealization {
  Point2 typical_center;
  std::vector<Point2> candidates;
  std::vector<Link> candidate_links;
  int intra_count = 0;  // active intra-cluster interferers, <= M - 1
  std::vector<Point2> cluster_centers;
  std::vector<Link> inter_links;

  AssociationModel model = AssociationModel::Uniform;
  std::optional<int> serving;  // empty: no LOS candidate (ClosestLos)

  /// Selects the serving candidate for `model`.
  void associate(AssociationModel m) {
    model = m;
    serving.reset();
    const int count = static_cast<int>(candidate_links.size());
    switch (m) {
      case AssociationModel::Uniform:
        serving = 0;
        break;
      case AssociationModel::Closest: {
        int best = 0;
        for (int i = 1; i < count; ++i) {
          if (candidate_links[i].distance < candidate_links[best].distance) best = i;
        }
        serving = best;
        break;
      }
      case AssociationModel::ClosestLos:
        for (int i = 0; i < count; ++i) {
          if (!candidate_links[i].los) continue;
          if (!serving || candidate_links[i].distance < candidate_links[*serving].distance) serving = i;
        }
        break;
    }
  }

  /// Indices of the active intra-cluster interferers: the first intra_count
  /// candidates other than the serving one (candidates are exchangeable).
  template <class F>
  void for_each_intra(F&& f) const {
    int taken = 0;
    for (int i = 0; i < static_cast<int>(candidate_links.size()) && taken < intra_count; ++i) {
      if (serving && i == *serving) continue;
      f(candidate_links[i]);
      ++taken;
    }
  }
};

namespace detail {

inline Link make_link(double d, bool los, const GainTable& table, double u_gain, double fading,
                      const ChannelParams& ch, double min_distance) {
  Link link;
  link.distance = d;
  link.los = los;
  double cumulative = 0.0;
  link.gain = table.entries.back().gain;
  for (const auto& e : table.entries) {
    cumulative += e.probability;
    if (u_gain < cumulative) {
      link.gain = e.gain;
      break;
    }
  }
  link.fading = fading;
  const double dd = std::max(d, min_distance);
  link.power = link.gain * fading * ch.intercept(los ? LinkState::Los : LinkState::Nlos) *
               std::pow(dd, -ch.alpha(los ? LinkState::Los : LinkState::Nlos));
  return link;
}

class LinkSampler {
public:
  LinkSampler(const NetworkConfig& cfg, const GainTable& table, const BlockageMode& blockage, double min_distance)
      : cfg_(cfg),
        table_(table),
        blockage_(blockage),
        min_distance_(min_distance),
        offset_(0.0, cfg.scatter_std),
        fading_los_(cfg.channel.nakagami_los, 1.0 / cfg.channel.nakagami_los),
        fading_nlos_(cfg.channel.nakagami_nlos, 1.0 / cfg.channel.nakagami_nlos) {}

  Point2 device(const Point2& center, TrialRng& rng) {
    const double dx = offset_(rng);
    const double dy = offset_(rng);
    return {center.x + dx, center.y + dy};
  }

  Link link(const Point2& p, TrialRng& rng) {
    const double d = p.norm();
    const bool los = blockage_.is_los(d, rng.uniform(), cfg_.channel);
    const double fading = los ? fading_los_(rng) : fading_nlos_(rng);
    return make_link(d, los, table_, rng.uniform(), fading, cfg_.channel, min_distance_);
  }

  double offset(TrialRng& rng) { return offset_(rng); }

private:
  const NetworkConfig& cfg_;
  const GainTable& table_;
  BlockageMode blockage_;
  double min_distance_;
  std::normal_distribution<double> offset_;
  std::gamma_distribution<double> fading_los_;
  std::gamma_distribution<double> fading_nlos_;
};

}  // namespace detail

/// Minimum link distance used by the simulator's path loss (meters).
inline constexpr double kMinLinkDistance = 1.0;

/// Draws one network. `center_distance`, if given, fixes the typical cluster
/// centre at (v, 0) instead of drawing it from Ra(v, sigma^2).
inline void sample_realization(const NetworkConfig& cfg, const GainTable& table, const BlockageMode& blockage,
                               TrialRng& rng, NetworkRealization& out,
                               std::optional<double> center_distance = std::nullopt,
                               double min_distance = kMinLinkDistance) {
  detail::LinkSampler sampler(cfg, table, blockage, min_distance);
  const int m = cfg.cluster_tx_count;

  if (center_distance) {
    out.typical_center = {*center_distance, 0.0};
  } else {
    const double x = sampler.offset(rng);
    const double y = sampler.offset(rng);
    out.typical_center = {x, y};
  }
  out.candidates.resize(m);
  out.candidate_links.resize(m);
  for (int i = 0; i < m; ++i) {
    out.candidates[i] = sampler.device(out.typical_center, rng);
    out.candidate_links[i] = sampler.link(out.candidates[i], rng);
  }
  std::poisson_distribution<int> intra(std::max(cfg.mean_active - 1.0, 0.0));
  out.intra_count = cfg.mean_active > 1.0 ? std::min(intra(rng), m - 1) : 0;

  const double h = cfg.region_half_width;
  std::poisson_distribution<int> clusters(cfg.parent_density * 4.0 * h * h);
  std::poisson_distribution<int> active(cfg.mean_active);
  const int n_clusters = clusters(rng);
  out.cluster_centers.clear();
  out.inter_links.clear();
  for (int c = 0; c < n_clusters; ++c) {
    const Point2 center{h * (2.0 * rng.uniform() - 1.0), h * (2.0 * rng.uniform() - 1.0)};
    out.cluster_centers.push_back(center);
    const int k = std::min(active(rng), m);
    for (int j = 0; j < k; ++j) out.inter_links.push_back(sampler.link(sampler.device(center, rng), rng));
  }
  out.associate(out.model);
}

/// Convenience overload returning a fresh realization associated for `model`.
inline NetworkRealization sample_realization(const NetworkConfig& cfg, AssociationModel model,
                                             const BlockageMode& blockage, TrialRng& rng) {
  NetworkRealization r;
  r.model = model;
  sample_realization(cfg, cfg.gain_table(), blockage, rng, r);
  return r;
}

struct SinrOptions {
  bool include_intra = true;
  bool include_inter = true;
  bool include_noise = true;
  bool include_los_interference = true;
  bool include_nlos_interference = true;

  void validate() const {
    const bool any_interference =
        (include_intra || include_inter) && (include_los_interference || include_nlos_interference);
    if (!any_interference && !include_noise) {
      throw UsageError("SINR needs at least one interference or noise term in the denominator");
    }
  }
};

/// SINR of the typical user. Zero when no serving transmitter exists.
inline double simulate_sinr(const NetworkRealization& r, const NetworkConfig& cfg, const GainTable& table,
                            const SinrOptions& options, double min_distance = kMinLinkDistance) {
  if (!r.serving) return 0.0;
  const Link& s = r.candidate_links[*r.serving];
  const LinkState state = s.los ? LinkState::Los : LinkState::Nlos;
  const double received = table.boresight * s.fading * cfg.channel.intercept(state) *
                          std::pow(std::max(s.distance, min_distance), -cfg.channel.alpha(state));
  auto counted = [&](const Link& l) {
    return l.los ? options.include_los_interference : options.include_nlos_interference;
  };
  double denominator = options.include_noise ? cfg.noise_power : 0.0;
  if (options.include_intra) {
    r.for_each_intra([&](const Link& l) {
      if (counted(l)) denominator += l.power;
    });
  }
  if (options.include_inter) {
    for (const auto& l : r.inter_links) {
      if (counted(l)) denominator += l.power;
    }
  }
  if (denominator == 0.0) return std::numeric_limits<double>::infinity();
  return received / denominator;
}

inline double simulate_sinr(const NetworkRealization& r, const NetworkConfig& cfg, const SinrOptions& options) {
  options.validate();
  return simulate_sinr(r, cfg, cfg.gain_table(), options);
}

struct CoverageEstimate {
  double p_hat = 0.0;
  double half_width_95 = 0.0;
  long n_trials = 0;
  std::uint64_t seed = 0;

  double standard_error() const { return half_width_95 / 1.96; }
};

struct SimulationSettings {
  long n_trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  BlockageMode blockage = BlockageMode::iid_exponential();
  SinrOptions options{};
};

inline constexpr long kTrialsPerChunk = 4096;

inline CoverageEstimate make_estimate(long covered, long n_trials, std::uint64_t seed) {
  CoverageEstimate e;
  e.n_trials = n_trials;
  e.seed = seed;
  e.p_hat = n_trials > 0 ? static_cast<double>(covered) / static_cast<double>(n_trials) : 0.0;
  e.half_width_95 = n_trials > 0 ? 1.96 * std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n_trials)) : 0.0;
  return e;
}

/// Coverage for several models, SINR variants and thresholds from the same
/// realizations (`sim.options` is ignored). Result is indexed
/// [model][variant][threshold].
inline std::vector<std::vector<std::vector<CoverageEstimate>>> estimate_coverage_variants(
    const NetworkConfig& cfg, std::span<const AssociationModel> models, std::span<const SinrOptions> variants,
    std::span<const double> thresholds, const SimulationSettings& sim) {
  cfg.validate();
  for (const auto& o : variants) o.validate();
  if (sim.n_trials < 1) throw DomainError("estimate_coverage: n_trials must be >= 1");
  const GainTable table = cfg.gain_table();
  const std::size_t nm = models.size();
  const std::size_t nv = variants.size();
  const std::size_t ng = thresholds.size();
  const auto chunks = static_cast<std::size_t>((sim.n_trials + kTrialsPerChunk - 1) / kTrialsPerChunk);
  std::vector<std::vector<long>> counts(chunks, std::vector<long>(nm * nv * ng, 0));

  parallel_for(chunks, sim.threads, [&](std::size_t chunk) {
    NetworkRealization r;
    auto& local = counts[chunk];
    const long begin = static_cast<long>(chunk) * kTrialsPerChunk;
    const long end = std::min(sim.n_trials, begin + kTrialsPerChunk);
    for (long trial = begin; trial < end; ++trial) {
      TrialRng rng(sim.seed, static_cast<std::uint64_t>(trial));
      sample_realization(cfg, table, sim.blockage, rng, r);
      for (std::size_t i = 0; i < nm; ++i) {
        r.associate(models[i]);
        for (std::size_t k = 0; k < nv; ++k) {
          const double sinr = simulate_sinr(r, cfg, table, variants[k]);
          for (std::size_t j = 0; j < ng; ++j) {
            if (sinr > thresholds[j]) ++local[(i * nv + k) * ng + j];
          }
        }
      }
    }
  });

  std::vector<std::vector<std::vector<CoverageEstimate>>> result(
      nm, std::vector<std::vector<CoverageEstimate>>(nv, std::vector<CoverageEstimate>(ng)));
  for (std::size_t i = 0; i < nm; ++i) {
    for (std::size_t k = 0; k < nv; ++k) {
      for (std::size_t j = 0; j < ng; ++j) {
        long covered = 0;
        for (const auto& c : counts) covered += c[(i * nv + k) * ng + j];
        result[i][k][j] = make_estimate(covered, sim.n_trials, sim.seed);
      }
    }
  }
  return result;
}

/// Coverage for several models and thresholds from the same realizations.
/// Result is indexed [model][threshold].
inline std::vector<std::vector<CoverageEstimate>> estimate_coverage_grid(const NetworkConfig& cfg,
                                                                         std::span<const AssociationModel> models,
                                                                         std::span<const double> thresholds,
                                                                         const SimulationSettings& sim) {
  const SinrOptions variants[] = {sim.options};
  auto cube = estimate_coverage_variants(cfg, models, variants, thresholds, sim);
  std::vector<std::vector<CoverageEstimate>> result;
  result.reserve(cube.size());
  for (auto& by_variant : cube) result.push_back(std::move(by_variant.front()));
  return result;
}

/// Fraction of trials with SINR > gamma_th (linear).
inline CoverageEstimate estimate_coverage(const NetworkConfig& cfg, AssociationModel model, double gamma_th,
                                          const SimulationSettings& sim) {
  const AssociationModel models[] = {model};
  const double thresholds[] = {gamma_th};
  return estimate_coverage_grid(cfg, models, thresholds, sim)[0][0];
}

// ---------------------------------------------------------------------------
// Laplace-transform oracle

enum class InterferenceSource { Intra, Inter };

struct LaplacePoint {
  double s = 0.0;
  int n = 1;
};

struct LaplaceEstimate {
  double mean = 1.0;
  double standard_error = 0.0;
};

/// Conditioning of the intra-cluster oracle: cluster-centre distance and,
/// for the nearest-transmitter models, the serving distance.
struct LaplaceCondition {
  double center_distance = 0.0;
  double serving_distance = 0.0;
};

namespace detail {

// Interference power of one intra-cluster interferer drawn under the
// conditional law implied by the association model: none closer than the
// serving device (Closest), or no LOS device closer than it (ClosestLos).
inline double conditional_intra_power(AssociationModel model, const LaplaceCondition& cond, LinkSampler& sampler,
                                      TrialRng& rng) {
  const Point2 center{cond.center_distance, 0.0};
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const Link l = sampler.link(sampler.device(center, rng), rng);
    switch (model) {
      case AssociationModel::Uniform: return l.power;
      case AssociationModel::Closest:
        if (l.distance > cond.serving_distance) return l.power;
        break;
      case AssociationModel::ClosestLos:
        if (!l.los || l.distance > cond.serving_distance) return l.power;
        break;
    }
  }
  throw DegenerateSupportError("laplace_oracle: conditioning event too rare for rejection sampling", 0.0);
}

}  // namespace detail

/// Monte Carlo estimate of E[exp(-s n I)] for the chosen interference source,
/// at every point, from the same realizations. Path loss is not clamped here
/// so the estimate targets the same quantity as the analytical transforms.
inline std::vector<LaplaceEstimate> laplace_oracle(const NetworkConfig& cfg, AssociationModel model,
                                                   InterferenceSource which, std::span<const LaplacePoint> points,
                                                   const LaplaceCondition& cond, long n_trials, std::uint64_t seed,
                                                   int threads = 1) {
  cfg.validate();
  if (n_trials < 1) throw DomainError("laplace_oracle: n_trials must be >= 1");
  for (const auto& p : points) {
    if (p.s < 0.0 || p.n < 1) throw DomainError("laplace_oracle: requires s >= 0 and n >= 1");
  }
  const GainTable table = cfg.gain_table();
  const std::size_t np = points.size();
  const auto chunks = static_cast<std::size_t>((n_trials + kTrialsPerChunk - 1) / kTrialsPerChunk);
  std::vector<std::vector<double>> sums(chunks, std::vector<double>(2 * np, 0.0));

  parallel_for(chunks, threads, [&](std::size_t chunk) {
    detail::LinkSampler sampler(cfg, table, BlockageMode::iid_exponential(), 0.0);
    NetworkRealization r;
    auto& local = sums[chunk];
    const long begin = static_cast<long>(chunk) * kTrialsPerChunk;
    const long end = std::min(n_trials, begin + kTrialsPerChunk);
    for (long trial = begin; trial < end; ++trial) {
      TrialRng rng(seed, static_cast<std::uint64_t>(trial));
      double interference = 0.0;
      if (which == InterferenceSource::Intra) {
        std::poisson_distribution<int> count(std::max(cfg.mean_active - 1.0, 0.0));
        const int k = cfg.mean_active > 1.0 ? std::min(count(rng), cfg.cluster_tx_count - 1) : 0;
        for (int i = 0; i < k; ++i) interference += detail::conditional_intra_power(model, cond, sampler, rng);
      } else {
        sample_realization(cfg, table, BlockageMode::iid_exponential(), rng, r, std::nullopt, 0.0);
        for (const auto& l : r.inter_links) interference += l.power;
      }
      for (std::size_t j = 0; j < np; ++j) {
        const double x = std::exp(-points[j].s * points[j].n * interference);
        local[2 * j] += x;
        local[2 * j + 1] += x * x;
      }
    }
  });

  std::vector<LaplaceEstimate> out(np);
  const auto n = static_cast<double>(n_trials);
  for (std::size_t j = 0; j < np; ++j) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& c : sums) {
      sum += c[2 * j];
      sum_sq += c[2 * j + 1];
    }
    const double mean = sum / n;
    const double var = n > 1.0 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    out[j] = {mean, std::sqrt(var / n)};
  }
  return out;
}

}  // namespace d2d
