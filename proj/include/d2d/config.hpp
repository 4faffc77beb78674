#pragma once

// Line-oriented `key = value` configuration. Values are kept as text until
// build(), so sweep axes and series can override any key the same way a file
// does; unit conversions (dB, degrees, average LOS distance) happen there.

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "d2d/errors.hpp"
#include "d2d/model.hpp"

namespace d2d {

struct FrequencyPreset {
  double carrier_hz;
  double alpha_los;
  double alpha_nlos;
  int antenna_elements;
};

inline constexpr std::array<FrequencyPreset, 4> kFrequencyPresets = {{
    {28e9, 2.0, 3.0, 10},
    {38e9, 2.0, 3.71, 20},
    {60e9, 2.25, 3.76, 40},
    {73e9, 2.0, 3.4, 80},
}};

/// Preset by carrier in GHz (28, 38, 60 or 73).
inline const FrequencyPreset& frequency_preset(int ghz) {
  for (const auto& p : kFrequencyPresets) {
    if (static_cast<int>(p.carrier_hz / 1e9 + 0.5) == ghz) return p;
  }
  throw ValidationError("frequency_preset", "no preset for " + std::to_string(ghz) + " GHz (use 28, 38, 60 or 73)");
}

namespace detail {

inline constexpr std::string_view kConfigKeys[] = {
    "parent_density_per_km2", "scatter_std",       "cluster_tx_count",  "mean_active",
    "region_half_width",      "gamma_th_db",       "alpha_los",         "alpha_nlos",
    "nakagami_los",           "nakagami_nlos",     "avg_los_distance",  "blockage_rate",
    "intercept_los_db",       "intercept_nlos_db", "tx_main_lobe_db",   "tx_side_lobe_db",
    "tx_beamwidth_deg",       "rx_main_lobe_db",   "rx_side_lobe_db",   "rx_beamwidth_deg",
    "antenna_elements",       "bandwidth_hz",      "noise_figure_db",   "tx_power_dbm",
    "noise_power",            "carrier_hz",        "frequency_preset",  "noise_power_db",
    "sinr_threshold",
};

inline bool is_config_key(std::string_view key) {
  for (auto k : kConfigKeys) {
    if (k == key) return true;
  }
  return false;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> to_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

}  // namespace detail

/// Unresolved configuration: raw values by key, later assignments win.
class ConfigSource {
public:
  /// Sets `key`; `line` is reported in parse errors (0 for programmatic overrides).
  void set(std::string_view key, std::string_view value, std::size_t line = 0) {
    const std::string k(detail::trim(key));
    if (!detail::is_config_key(k)) throw ParseError("unknown key '" + k + "'", line);
    const std::string v(detail::trim(value));
    if (!detail::to_number(v)) throw ParseError("value for '" + k + "' is not a number: '" + v + "'", line);
    entries_[k] = {v, line};
  }

  void set(std::string_view key, double value) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << value;
    set(key, out.str());
  }

  bool has(std::string_view key) const { return entries_.count(std::string(key)) > 0; }

  /// Resolves every value into a validated NetworkConfig.
  NetworkConfig build() const;

  /// SINR threshold in dB (gamma_th_db, default 20).
  double gamma_th_db() const { return number("gamma_th_db").value_or(20.0); }

private:
  struct Entry {
    std::string text;
    std::size_t line;
  };

  std::optional<double> number(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return detail::to_number(it->second.text);
  }

  int integer(const std::string& key, int fallback) const {
    const auto v = number(key);
    if (!v) return fallback;
    if (*v != static_cast<double>(static_cast<long long>(*v)) || *v > 1e9 || *v < -1e9) {
      throw ValidationError(key, "must be an integer");
    }
    return static_cast<int>(*v);
  }

  std::map<std::string, Entry> entries_;
};

inline NetworkConfig ConfigSource::build() const {
  NetworkConfig cfg;
  auto get = [&](const char* key, double fallback) { return number(key).value_or(fallback); };

  double carrier = 28e9;
  double alpha_los = 2.0;
  double alpha_nlos = 4.0;
  int elements = 1;
  if (const auto preset = number("frequency_preset")) {
    const auto& p = frequency_preset(static_cast<int>(*preset + 0.5));
    carrier = p.carrier_hz;
    alpha_los = p.alpha_los;
    alpha_nlos = p.alpha_nlos;
    elements = p.antenna_elements;
  }
  cfg.carrier_hz = get("carrier_hz", carrier);
  cfg.channel.alpha_los = get("alpha_los", alpha_los);
  cfg.channel.alpha_nlos = get("alpha_nlos", alpha_nlos);
  cfg.antenna_elements = integer("antenna_elements", elements);

  cfg.parent_density = get("parent_density_per_km2", 150.0) * 1e-6;
  cfg.scatter_std = get("scatter_std", 20.0);
  cfg.cluster_tx_count = integer("cluster_tx_count", 40);
  cfg.mean_active = get("mean_active", 5.0);
  cfg.region_half_width = get("region_half_width", 500.0);
  if (has("sinr_threshold") && has("gamma_th_db")) {
    throw ValidationError("sinr_threshold", "give either sinr_threshold or gamma_th_db, not both");
  }
  cfg.sinr_threshold = has("sinr_threshold") ? *number("sinr_threshold") : db_to_linear(gamma_th_db());

  cfg.channel.nakagami_los = integer("nakagami_los", 3);
  cfg.channel.nakagami_nlos = integer("nakagami_nlos", 2);
  if (has("avg_los_distance") && has("blockage_rate")) {
    throw ValidationError("blockage_rate", "give either blockage_rate or avg_los_distance, not both");
  }
  cfg.channel.blockage_rate = has("blockage_rate") ? *number("blockage_rate")
                                                   : blockage_rate_from_avg_los_distance(get("avg_los_distance", 30.0));
  const double free_space = free_space_intercept(cfg.carrier_hz);
  cfg.channel.intercept_los = has("intercept_los_db") ? db_to_linear(*number("intercept_los_db")) : free_space;
  cfg.channel.intercept_nlos = has("intercept_nlos_db") ? db_to_linear(*number("intercept_nlos_db")) : free_space;

  cfg.tx_pattern = AntennaPattern::from_db(get("tx_main_lobe_db", 10.0), get("tx_side_lobe_db", -10.0),
                                           get("tx_beamwidth_deg", 30.0));
  cfg.rx_pattern = AntennaPattern::from_db(get("rx_main_lobe_db", 10.0), get("rx_side_lobe_db", 0.0),
                                           get("rx_beamwidth_deg", 90.0));

  if (has("noise_power") && has("noise_power_db")) {
    throw ValidationError("noise_power", "give either noise_power or noise_power_db, not both");
  }
  if (has("noise_power")) {
    cfg.noise_power = *number("noise_power");
  } else if (has("noise_power_db")) {
    cfg.noise_power = db_to_linear(*number("noise_power_db"));
  } else {
    NoiseSpec noise;
    noise.bandwidth_hz = get("bandwidth_hz", noise.bandwidth_hz);
    noise.noise_figure_db = get("noise_figure_db", noise.noise_figure_db);
    noise.tx_power_dbm = get("tx_power_dbm", noise.tx_power_dbm);
    cfg.noise_power = default_noise_power(noise);
  }
  cfg.validate();
  return cfg;
}

/// Parses configuration text; `#` starts a comment.
inline ConfigSource parse_config_text(std::string_view text) {
  ConfigSource source;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
      const auto key = detail::trim(line.substr(0, eq));
      if (key.empty()) throw ParseError("missing key before '='", line_no);
      source.set(key, line.substr(eq + 1), line_no);
    }
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return source;
}

inline ConfigSource read_config_source(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

/// Reads and validates a configuration file.
inline NetworkConfig parse_config(const std::string& path) { return read_config_source(path).build(); }

}  // namespace d2d
