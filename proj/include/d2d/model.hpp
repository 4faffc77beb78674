#pragma once

// Network description (cluster process, blockage, path loss, sectored
// antennas) and the distance distributions of the serving and interfering
// transmitters for the three association strategies.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/errors.hpp"
#include "d2d/quadrature.hpp"
#include "d2d/special_functions.hpp"

namespace d2d {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

enum class AssociationModel { Uniform, Closest, ClosestLos };

inline constexpr std::array<AssociationModel, 3> kAllModels = {
    AssociationModel::Uniform, AssociationModel::Closest, AssociationModel::ClosestLos};

inline std::string_view to_string(AssociationModel m) {
  switch (m) {
    case AssociationModel::Uniform: return "uniform";
    case AssociationModel::Closest: return "closest";
    case AssociationModel::ClosestLos: return "closest_los";
  }
  return "?";
}

inline AssociationModel parse_association_model(std::string_view name) {
  for (auto m : kAllModels) {
    if (to_string(m) == name) return m;
  }
  throw UsageError("unknown association model '" + std::string(name) + "'");
}

enum class LinkState { Los, Nlos };

/// Two-level sectored pattern: main-lobe gain over `beamwidth`, side-lobe gain elsewhere.
struct AntennaPattern {
  double main_lobe_gain = 10.0;  // linear
  double side_lobe_gain = 1.0;   // linear
  double beamwidth = std::numbers::pi / 2.0;  // radians

  static AntennaPattern from_db(double main_db, double side_db, double beamwidth_deg) {
    return {db_to_linear(main_db), db_to_linear(side_db), deg_to_rad(beamwidth_deg)};
  }

  void validate(const std::string& name) const {
    if (!(side_lobe_gain > 0.0)) throw ValidationError(name, "side-lobe gain must be positive");
    if (!(main_lobe_gain >= side_lobe_gain)) throw ValidationError(name, "main-lobe gain below side-lobe gain");
    if (!(beamwidth > 0.0 && beamwidth < 2.0 * std::numbers::pi)) {
      throw ValidationError(name, "beamwidth must lie in (0, 360) degrees");
    }
  }
};

struct GainOutcome {
  double gain;
  double probability;
};

/// Directivity gain of an interfering link: four outcomes (main/side lobe at
/// each end). `boresight` is the gain of the aligned serving link.
struct GainTable {
  std::array<GainOutcome, 4> entries{};
  double boresight = 0.0;

  double expected_gain() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.gain * e.probability;
    return sum;
  }
};

/// Table of interference gains for the given patterns. Every gain carries a
/// factor antenna_elements^2 (one N_a per end of the link).
inline GainTable build_gain_table(const AntennaPattern& tx, const AntennaPattern& rx, int antenna_elements) {
  tx.validate("tx_pattern");
  rx.validate("rx_pattern");
  if (antenna_elements < 1) throw ValidationError("antenna_elements", "must be >= 1");
  const double na2 = static_cast<double>(antenna_elements) * static_cast<double>(antenna_elements);
  const double pt = tx.beamwidth / (2.0 * std::numbers::pi);
  const double pr = rx.beamwidth / (2.0 * std::numbers::pi);
  GainTable table;
  table.entries[0] = {na2 * tx.main_lobe_gain * rx.main_lobe_gain, pt * pr};
  table.entries[1] = {na2 * tx.side_lobe_gain * rx.main_lobe_gain, (1.0 - pt) * pr};
  table.entries[2] = {na2 * tx.main_lobe_gain * rx.side_lobe_gain, pt * (1.0 - pr)};
  table.entries[3] = {na2 * tx.side_lobe_gain * rx.side_lobe_gain,
                      1.0 - table.entries[0].probability - table.entries[1].probability -
                          table.entries[2].probability};
  table.boresight = na2 * tx.main_lobe_gain * rx.main_lobe_gain;
  return table;
}

/// Free-space gain at 1 m, (c / (4 pi f))^2.
inline double free_space_intercept(double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw ValidationError("carrier_hz", "must be positive");
  const double k = kSpeedOfLight / (4.0 * std::numbers::pi * carrier_hz);
  return k * k;
}

struct ChannelParams {
  double alpha_los = 2.0;
  double alpha_nlos = 4.0;
  double intercept_los = free_space_intercept(28e9);  // linear, at the 1 m reference distance
  double intercept_nlos = free_space_intercept(28e9);
  int nakagami_los = 3;
  int nakagami_nlos = 2;
  double blockage_rate = std::numbers::sqrt2 / 30.0;  // 1/m

  void validate() const {
    if (!(alpha_los > 0.0)) throw ValidationError("alpha_los", "must be positive");
    if (!(alpha_nlos >= alpha_los)) throw ValidationError("alpha_nlos", "must be >= alpha_los");
    if (!(intercept_los > 0.0)) throw ValidationError("intercept_los", "must be positive");
    if (!(intercept_nlos > 0.0)) throw ValidationError("intercept_nlos", "must be positive");
    if (nakagami_los < 1) throw ValidationError("nakagami_los", "must be a positive integer");
    if (nakagami_nlos < 1) throw ValidationError("nakagami_nlos", "must be a positive integer");
    if (!(blockage_rate > 0.0) || !std::isfinite(blockage_rate)) {
      throw ValidationError("blockage_rate", "must be positive and finite");
    }
  }

  double alpha(LinkState s) const { return s == LinkState::Los ? alpha_los : alpha_nlos; }
  double intercept(LinkState s) const { return s == LinkState::Los ? intercept_los : intercept_nlos; }
  int nakagami(LinkState s) const { return s == LinkState::Los ? nakagami_los : nakagami_nlos; }
};

/// Blockage rate for a given mean LOS distance (mean = sqrt(2) / rate).
inline double blockage_rate_from_avg_los_distance(double avg_los_distance) {
  if (!(avg_los_distance > 0.0)) throw ValidationError("avg_los_distance", "must be positive");
  return std::numbers::sqrt2 / avg_los_distance;
}

struct NoiseSpec {
  double bandwidth_hz = 100e6;
  double noise_figure_db = 10.0;
  double tx_power_dbm = 23.0;
};

/// Thermal noise over the band, normalised by the transmit power (linear).
inline double default_noise_power(const NoiseSpec& spec = {}) {
  if (!(spec.bandwidth_hz > 0.0)) throw ValidationError("bandwidth_hz", "must be positive");
  const double noise_dbm = -174.0 + 10.0 * std::log10(spec.bandwidth_hz) + spec.noise_figure_db;
  return db_to_linear(noise_dbm - spec.tx_power_dbm);
}

struct NetworkConfig {
  double parent_density = 150e-6;  // clusters per m^2
  double scatter_std = 20.0;       // m, per-coordinate std of device offsets
  int cluster_tx_count = 40;       // M
  double mean_active = 5.0;        // s-bar
  ChannelParams channel{};
  AntennaPattern tx_pattern = AntennaPattern::from_db(10.0, -10.0, 30.0);
  AntennaPattern rx_pattern = AntennaPattern::from_db(10.0, 0.0, 90.0);
  int antenna_elements = 1;
  double noise_power = default_noise_power();
  double carrier_hz = 28e9;
  double region_half_width = 500.0;  // m
  double sinr_threshold = 100.0;     // linear

  double variance() const { return scatter_std * scatter_std; }

  GainTable gain_table() const { return build_gain_table(tx_pattern, rx_pattern, antenna_elements); }

  void validate() const {
    if (!(parent_density > 0.0)) throw ValidationError("parent_density", "must be positive");
    if (!(scatter_std > 0.0) || !std::isfinite(scatter_std)) throw ValidationError("scatter_std", "must be positive");
    if (cluster_tx_count < 1) throw ValidationError("cluster_tx_count", "must be >= 1");
    if (!(mean_active >= 1.0)) throw ValidationError("mean_active", "must be >= 1");
    if (mean_active > cluster_tx_count) throw ValidationError("mean_active", "must not exceed cluster_tx_count");
    channel.validate();
    tx_pattern.validate("tx_pattern");
    rx_pattern.validate("rx_pattern");
    if (antenna_elements < 1) throw ValidationError("antenna_elements", "must be >= 1");
    if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) throw ValidationError("noise_power", "must be >= 0");
    if (!(carrier_hz > 0.0)) throw ValidationError("carrier_hz", "must be positive");
    if (!(region_half_width > 0.0)) throw ValidationError("region_half_width", "must be positive");
    if (!(sinr_threshold >= 0.0)) throw ValidationError("gamma_th", "must be >= 0");
  }

};

// ---------------------------------------------------------------------------
// Blockage and path loss

inline double los_probability(double d, const ChannelParams& channel) {
  if (std::isnan(d) || d < 0.0) throw DomainError("los_probability: negative distance");
  return std::exp(-channel.blockage_rate * d);
}

inline double path_loss(double d, LinkState state, const ChannelParams& channel) {
  if (!(d > 0.0)) throw DomainError("path_loss: distance must be positive");
  return channel.intercept(state) * std::pow(d, -channel.alpha(state));
}

inline double path_loss(double d, bool is_los, const ChannelParams& channel) {
  return path_loss(d, is_los ? LinkState::Los : LinkState::Nlos, channel);
}

// ---------------------------------------------------------------------------
// Distance distributions

/// Distance from the typical user to its own cluster centre: Ra(v, sigma^2).
inline double cluster_center_distance_pdf(double v, const NetworkConfig& cfg) {
  if (std::isnan(v) || v < 0.0) throw DomainError("cluster_center_distance_pdf: negative distance");
  return rayleigh_pdf(v, cfg.variance());
}

/// Cumulative LOS-weighted distance mass F(r) = int_0^r exp(-eps t) f(t) dt,
/// with f either Ri(t, v, sigma^2) or the unconditioned Ra(t, 2 sigma^2).
///
/// The cumulative values are tabulated on equal panels at construction; a
/// lookup adds one fixed Kronrod rule over the partial panel. Objects are
/// immutable after construction and safe to share across threads.
class LosDistanceCdf {
public:
  /// Conditioned on the cluster-centre distance v.
  static LosDistanceCdf conditioned(const NetworkConfig& cfg, double v, double tail_cutoff_sigmas = 12.0) {
    if (std::isnan(v) || v < 0.0) throw DomainError("LosDistanceCdf: negative v");
    LosDistanceCdf cdf(cfg.channel.blockage_rate, cfg.variance(), v, true);
    cdf.build(v + tail_cutoff_sigmas * cfg.scatter_std);
    return cdf;
  }

  /// Unconditioned (Ra(r, 2 sigma^2) distance law).
  static LosDistanceCdf unconditioned(const NetworkConfig& cfg, double tail_cutoff_sigmas = 12.0) {
    LosDistanceCdf cdf(cfg.channel.blockage_rate, 2.0 * cfg.variance(), 0.0, false);
    cdf.build(tail_cutoff_sigmas * std::sqrt(2.0 * cfg.variance()));
    return cdf;
  }

  /// LOS-weighted density exp(-eps r) f(r).
  double density(double r) const {
    const double f = conditioned_ ? rician_pdf(r, offset_, variance_) : rayleigh_pdf(r, variance_);
    return std::exp(-eps_ * r) * f;
  }

  double operator()(double r) const {
    if (std::isnan(r) || r < 0.0) throw DomainError("LosDistanceCdf: negative distance");
    if (r >= upper_) return cumulative_.back();
    const auto k = static_cast<std::size_t>(r / width_);
    const double start = static_cast<double>(k) * width_;
    if (r == start) return cumulative_[k];
    auto f = [this](double t) { return density(t); };
    return cumulative_[k] + detail::gauss_kronrod_15(f, start, r).value;
  }

  /// Probability that one transmitter is LOS: F(inf).
  double total() const { return cumulative_.back(); }

private:
  static constexpr int kPanels = 128;

  LosDistanceCdf(double eps, double variance, double offset, bool conditioned)
      : eps_(eps), variance_(variance), offset_(offset), conditioned_(conditioned) {}

  void build(double upper) {
    upper_ = upper;
    width_ = upper / kPanels;
    cumulative_.assign(kPanels + 1, 0.0);
    QuadratureSpec spec;
    spec.abs_tol = 1e-14;
    spec.rel_tol = 1e-12;
    auto f = [this](double t) { return density(t); };
    for (int k = 0; k < kPanels; ++k) {
      const auto r = integrate(f, k * width_, (k + 1) * width_, spec);
      cumulative_[k + 1] = cumulative_[k] + r.value;
    }
  }

  double eps_;
  double variance_;
  double offset_;
  bool conditioned_;
  double upper_ = 0.0;
  double width_ = 0.0;
  std::vector<double> cumulative_;
};

/// Nearest-LOS serving density M (1 - F(r))^{M-1} exp(-eps r) f(r), given the tabulated F.
inline double closest_los_serving_pdf(double r, const LosDistanceCdf& cdf, int cluster_tx_count) {
  const double remaining = std::max(0.0, 1.0 - cdf(r));
  return cluster_tx_count * std::pow(remaining, cluster_tx_count - 1) * cdf.density(r);
}

/// Density of the serving distance r given the cluster-centre distance v.
/// For ClosestLos this is a sub-density whose mass is P(at least one LOS transmitter).
inline double serving_distance_pdf(AssociationModel model, double r, double v, const NetworkConfig& cfg) {
  if (std::isnan(r) || r < 0.0) throw DomainError("serving_distance_pdf: negative r");
  if (std::isnan(v) || v < 0.0) throw DomainError("serving_distance_pdf: negative v");
  const double var = cfg.variance();
  const int m = cfg.cluster_tx_count;
  switch (model) {
    case AssociationModel::Uniform:
      return rician_pdf(r, v, var);
    case AssociationModel::Closest: {
      if (m == 1) return rician_pdf(r, v, var);
      const double q = marcum_q1(v / cfg.scatter_std, r / cfg.scatter_std);
      return m * std::pow(q, m - 1) * rician_pdf(r, v, var);
    }
    case AssociationModel::ClosestLos: {
      const double eps = cfg.channel.blockage_rate;
      auto los_density = [&](double t) { return std::exp(-eps * t) * rician_pdf(t, v, var); };
      QuadratureSpec spec;
      spec.abs_tol = 1e-10;
      spec.rel_tol = 1e-12;
      const double cdf = integrate(los_density, 0.0, r, spec).value;
      return m * std::pow(std::max(0.0, 1.0 - cdf), m - 1) * los_density(r);
    }
  }
  return 0.0;
}

/// Density of an intra-cluster interferer's distance s, given v and the
/// serving distance. For ClosestLos, `link` selects the LOS group (truncated
/// below the serving distance) or the NLOS group (untruncated).
inline double interferer_distance_pdf(AssociationModel model, double s, double v, double r_serving,
                                      const NetworkConfig& cfg, LinkState link = LinkState::Los) {
  if (std::isnan(s) || s < 0.0) throw DomainError("interferer_distance_pdf: negative s");
  if (std::isnan(v) || v < 0.0) throw DomainError("interferer_distance_pdf: negative v");
  if (std::isnan(r_serving) || r_serving < 0.0) throw DomainError("interferer_distance_pdf: negative serving distance");
  const double var = cfg.variance();
  const bool truncated = model == AssociationModel::Closest ||
                         (model == AssociationModel::ClosestLos && link == LinkState::Los);
  if (!truncated) return rician_pdf(s, v, var);
  const double q = marcum_q1(v / cfg.scatter_std, r_serving / cfg.scatter_std);
  if (q < 1e-300) {
    throw DegenerateSupportError("interferer_distance_pdf: serving distance in the extreme tail", q);
  }
  if (s <= r_serving) return 0.0;
  return rician_pdf(s, v, var) / q;
}

/// Serving-distance density with the cluster-centre conditioning dropped
/// (devices at Ra(r, 2 sigma^2) from the typical user).
inline double serving_distance_pdf_approx(AssociationModel model, double r, const NetworkConfig& cfg) {
  if (std::isnan(r) || r < 0.0) throw DomainError("serving_distance_pdf_approx: negative r");
  const double var2 = 2.0 * cfg.variance();
  const int m = cfg.cluster_tx_count;
  switch (model) {
    case AssociationModel::Uniform:
      return rayleigh_pdf(r, var2);
    case AssociationModel::Closest:
      return m * std::exp(-(m - 1) * r * r / (4.0 * cfg.variance())) * rayleigh_pdf(r, var2);
    case AssociationModel::ClosestLos: {
      const double eps = cfg.channel.blockage_rate;
      auto los_density = [&](double t) { return std::exp(-eps * t) * rayleigh_pdf(t, var2); };
      QuadratureSpec spec;
      spec.abs_tol = 1e-10;
      spec.rel_tol = 1e-12;
      const double cdf = integrate(los_density, 0.0, r, spec).value;
      return m * std::pow(std::max(0.0, 1.0 - cdf), m - 1) * los_density(r);
    }
  }
  return 0.0;
}

}  // namespace d2d
