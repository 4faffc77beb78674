#pragma once

// Parameter sweeps over one configuration axis, evaluated by any mix of
// engines, written as CSV. Built-in specs reproduce each figure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "d2d/analytical.hpp"
#include "d2d/config.hpp"
#include "d2d/errors.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/parallel.hpp"

namespace d2d {

enum class Engine { Analytical, AnalyticalApprox, LowerBound, MonteCarlo };
enum class Metric { Coverage, Ase };

inline std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::Analytical: return "analytical";
    case Engine::AnalyticalApprox: return "analytical_approx";
    case Engine::LowerBound: return "lower_bound";
    case Engine::MonteCarlo: return "montecarlo";
  }
  return "?";
}

inline Engine parse_engine(std::string_view name) {
  for (auto e : {Engine::Analytical, Engine::AnalyticalApprox, Engine::LowerBound, Engine::MonteCarlo}) {
    if (to_string(e) == name) return e;
  }
  throw UsageError("unknown engine '" + std::string(name) + "'");
}

/// One curve family within a sweep: configuration overrides plus the
/// interference/noise/blockage variant it evaluates.
struct SweepSeries {
  std::string name = "default";
  std::vector<std::pair<std::string, std::string>> overrides;
  CoverageFlags flags{};
  SinrOptions options{};
  BlockageMode::Kind blockage = BlockageMode::Kind::IidExponential;

  /// True when the variant only exists in the simulator.
  bool simulation_only() const {
    const SinrOptions full{};
    const bool toggled = options.include_intra != full.include_intra || options.include_inter != full.include_inter ||
                         options.include_noise != full.include_noise ||
                         options.include_los_interference != full.include_los_interference ||
                         options.include_nlos_interference != full.include_nlos_interference;
    return !flags.use_assumption2 && (toggled || blockage != BlockageMode::Kind::IidExponential);
  }

  /// Applies one variant token (see README for the list) or `key:value` override.
  void apply_token(std::string_view token) {
    if (const auto colon = token.find(':'); colon != std::string_view::npos) {
      overrides.emplace_back(std::string(detail::trim(token.substr(0, colon))),
                             std::string(detail::trim(token.substr(colon + 1))));
      return;
    }
    if (token == "intra_only") {
      options.include_inter = false;
    } else if (token == "inter_only") {
      options.include_intra = false;
    } else if (token == "no_noise") {
      options.include_noise = false;
    } else if (token == "los_interference_only") {
      options.include_nlos_interference = false;
    } else if (token == "nlos_interference_only") {
      options.include_los_interference = false;
    } else if (token == "no_interference") {
      options.include_intra = false;
      options.include_inter = false;
    } else if (token == "los_ball") {
      blockage = BlockageMode::Kind::LosBall;
    } else if (token == "intra_los_only") {
      flags.use_assumption2 = true;
      options.include_inter = false;
      options.include_noise = false;
      blockage = BlockageMode::Kind::AllLos;
    } else if (token == "unconditioned") {
      flags.use_assumption1 = true;
    } else {
      throw UsageError("unknown series option '" + std::string(token) + "'");
    }
  }
};

struct SweepSpec {
  std::string axis = "mean_active";
  std::vector<double> values;
  std::vector<AssociationModel> models{kAllModels.begin(), kAllModels.end()};
  std::vector<Engine> engines{Engine::Analytical, Engine::MonteCarlo};
  Metric metric = Metric::Coverage;
  std::vector<SweepSeries> series{SweepSeries{}};
  /// Applied to the base configuration before any series or axis value.
  std::vector<std::pair<std::string, std::string>> base_overrides;

  void validate() const {
    static constexpr std::string_view axes[] = {"mean_active", "gamma_th_db", "scatter_std", "carrier_hz",
                                                "avg_los_distance"};
    if (std::find(std::begin(axes), std::end(axes), axis) == std::end(axes)) {
      throw UsageError("unsupported sweep axis '" + axis + "'");
    }
    if (values.empty()) throw UsageError("sweep needs at least one axis value");
    if (engines.empty()) throw UsageError("sweep needs at least one engine");
    if (models.empty()) throw UsageError("sweep needs at least one model");
    if (series.empty()) throw UsageError("sweep needs at least one series");
  }
};

struct SweepRow {
  double axis_value = 0.0;
  AssociationModel model = AssociationModel::Uniform;
  Engine engine = Engine::Analytical;
  std::optional<double> value;
  std::optional<double> ci_half_width;
  bool is_upper_bound = false;
  std::optional<std::uint64_t> seed;
  std::string error;
  std::string series;
};

struct SweepSettings {
  long n_trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  QuadratureSpec quad{};
};

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct SweepUnit {
  std::size_t series = 0;
  std::vector<std::size_t> value_indices;
};

}  // namespace detail

inline constexpr std::string_view kSweepCsvHeader =
    "axis_value,model,engine,coverage_or_ase,ci_half_width,is_upper_bound,seed,error,series";

inline void write_csv_row(std::ostream& out, const SweepRow& row) {
  out << format_number(row.axis_value) << ',' << to_string(row.model) << ',' << to_string(row.engine) << ','
      << (row.value ? format_number(*row.value) : "") << ','
      << (row.ci_half_width ? format_number(*row.ci_half_width) : "") << ','
      << (row.is_upper_bound ? "true" : "false") << ',' << (row.seed ? std::to_string(*row.seed) : "") << ','
      << detail::csv_field(row.error) << ',' << detail::csv_field(row.series) << '\n';
}

/// Evaluates every (value, series, model, engine) combination. Rows come back
/// in that nesting order whatever the thread count; evaluation failures are
/// stored in the row's error field.
inline std::vector<SweepRow> run_sweep(const ConfigSource& base, const SweepSpec& spec, const SweepSettings& settings) {
  spec.validate();
  const bool gamma_axis = spec.axis == "gamma_th_db";

  std::vector<detail::SweepUnit> units;
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    if (gamma_axis) {
      detail::SweepUnit u{s, {}};
      for (std::size_t v = 0; v < spec.values.size(); ++v) u.value_indices.push_back(v);
      units.push_back(u);
    } else {
      for (std::size_t v = 0; v < spec.values.size(); ++v) units.push_back({s, {v}});
    }
  }

  const std::size_t per_point = spec.models.size() * spec.engines.size();
  // results[value][series][model * engines + engine]
  std::vector<std::vector<std::vector<SweepRow>>> results(
      spec.values.size(), std::vector<std::vector<SweepRow>>(spec.series.size(), std::vector<SweepRow>(per_point)));

  const bool parallel_units = units.size() > 1 && settings.threads > 1;
  parallel_for(units.size(), parallel_units ? settings.threads : 1, [&](std::size_t ui) {
    const auto& unit = units[ui];
    const SweepSeries& series = spec.series[unit.series];

    auto row_for = [&](std::size_t v, std::size_t m, std::size_t e) -> SweepRow& {
      SweepRow& row = results[v][unit.series][m * spec.engines.size() + e];
      row.axis_value = spec.values[v];
      row.model = spec.models[m];
      row.engine = spec.engines[e];
      row.series = series.name;
      row.is_upper_bound = spec.engines[e] == Engine::Analytical || spec.engines[e] == Engine::AnalyticalApprox;
      return row;
    };
    auto fail_all = [&](const std::string& what) {
      for (auto v : unit.value_indices) {
        for (std::size_t m = 0; m < spec.models.size(); ++m) {
          for (std::size_t e = 0; e < spec.engines.size(); ++e) row_for(v, m, e).error = what;
        }
      }
    };

    // configuration for this unit (gamma sweeps share one configuration)
    ConfigSource source = base;
    NetworkConfig cfg;
    try {
      for (const auto& [k, val] : spec.base_overrides) source.set(k, val);
      for (const auto& [k, val] : series.overrides) source.set(k, val);
      if (!gamma_axis) source.set(spec.axis, spec.values[unit.value_indices.front()]);
      cfg = source.build();
    } catch (const Error& ex) {
      fail_all(ex.what());
      return;
    }
    std::vector<double> gammas;
    for (auto v : unit.value_indices) {
      gammas.push_back(gamma_axis ? db_to_linear(spec.values[v]) : cfg.sinr_threshold);
    }
    auto metric = [&](double coverage_value, double gamma) {
      return spec.metric == Metric::Ase ? ase_from_coverage(coverage_value, gamma, cfg) : coverage_value;
    };

    std::optional<CoverageEngine> analytical;
    std::optional<std::vector<std::vector<CoverageEstimate>>> simulated;
    std::string simulation_error;

    for (std::size_t e = 0; e < spec.engines.size(); ++e) {
      const Engine engine = spec.engines[e];
      if (engine == Engine::MonteCarlo) {
        try {
          SimulationSettings sim;
          sim.n_trials = settings.n_trials;
          sim.seed = settings.seed;
          sim.threads = parallel_units ? 1 : settings.threads;
          sim.options = series.options;
          switch (series.blockage) {
            case BlockageMode::Kind::IidExponential: sim.blockage = BlockageMode::iid_exponential(); break;
            case BlockageMode::Kind::LosBall: sim.blockage = BlockageMode::los_ball_median(cfg.channel); break;
            case BlockageMode::Kind::AllLos: sim.blockage = BlockageMode::all_los(); break;
          }
          simulated = estimate_coverage_grid(cfg, spec.models, gammas, sim);
        } catch (const Error& ex) {
          simulation_error = ex.what();
        }
      }
      for (std::size_t m = 0; m < spec.models.size(); ++m) {
        for (std::size_t k = 0; k < unit.value_indices.size(); ++k) {
          SweepRow& row = row_for(unit.value_indices[k], m, e);
          const double gamma = gammas[k];
          try {
            switch (engine) {
              case Engine::Analytical:
              case Engine::AnalyticalApprox: {
                if (series.simulation_only()) {
                  throw UsageError("variant '" + series.name + "' has no analytical counterpart");
                }
                if (!analytical) analytical.emplace(cfg, settings.quad);
                CoverageFlags flags = series.flags;
                if (engine == Engine::AnalyticalApprox) flags.use_assumption1 = true;
                row.value = metric(analytical->coverage(spec.models[m], gamma, flags).value, gamma);
                break;
              }
              case Engine::LowerBound:
                if (spec.models[m] != AssociationModel::Uniform) {
                  throw UsageError("the closed-form lower bound exists for the uniform model only");
                }
                row.value = metric(coverage_lower_bound(gamma, cfg), gamma);
                break;
              case Engine::MonteCarlo: {
                if (!simulated) throw UsageError(simulation_error);
                const auto& est = (*simulated)[m][k];
                row.value = metric(est.p_hat, gamma);
                row.ci_half_width = metric(est.half_width_95, gamma);
                row.seed = est.seed;
                break;
              }
            }
          } catch (const Error& ex) {
            row.error = ex.what();
          }
        }
      }
    }
  });

  std::vector<SweepRow> rows;
  rows.reserve(spec.values.size() * spec.series.size() * per_point);
  for (const auto& by_series : results) {
    for (const auto& by_point : by_series) {
      for (const auto& row : by_point) rows.push_back(row);
    }
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& row : rows) write_csv_row(out, row);
}

// ---------------------------------------------------------------------------
// Figure presets

namespace detail {

inline std::vector<double> range(double first, double last, double step) {
  std::vector<double> v;
  const int n = static_cast<int>((last - first) / step + 0.5);
  for (int i = 0; i <= n; ++i) v.push_back(first + step * i);
  return v;
}

inline SweepSeries series(std::string name, std::initializer_list<std::string_view> tokens) {
  SweepSeries s;
  s.name = std::move(name);
  for (auto t : tokens) s.apply_token(t);
  return s;
}

}  // namespace detail

inline constexpr std::string_view kFigureIds[] = {"2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b"};

/// Built-in sweep reproducing one figure.
inline SweepSpec figure_spec(std::string_view id) {
  using detail::series;
  SweepSpec spec;
  if (id == "2a") {
    spec.axis = "mean_active";
    spec.values = detail::range(1, 10, 1);
    spec.base_overrides = {{"scatter_std", "20"}, {"gamma_th_db", "20"}};
  } else if (id == "2b") {
    spec.axis = "gamma_th_db";
    spec.values = detail::range(0, 40, 5);
    spec.models = {AssociationModel::Uniform};
    spec.engines = {Engine::Analytical, Engine::AnalyticalApprox, Engine::LowerBound, Engine::MonteCarlo};
    spec.base_overrides = {{"frequency_preset", "60"}, {"scatter_std", "10"}, {"mean_active", "10"}};
    spec.series = {series("intra_los_only", {"intra_los_only"})};
  } else if (id == "3a") {
    spec.axis = "mean_active";
    spec.values = detail::range(1, 10, 1);
    spec.models = {AssociationModel::Uniform};
    spec.engines = {Engine::MonteCarlo};
    spec.base_overrides = {{"gamma_th_db", "10"}};
    spec.series = {};
    for (const char* sigma : {"10", "20"}) {
      const std::string tag = std::string("sigma") + sigma;
      const std::string set = std::string("scatter_std:") + sigma;
      spec.series.push_back(series(tag + "_intra_only", {"intra_only", set}));
      spec.series.push_back(series(tag + "_inter_only", {"inter_only", set}));
      spec.series.push_back(series(tag + "_both", {set}));
    }
  } else if (id == "3b") {
    spec.axis = "mean_active";
    spec.values = detail::range(1, 10, 1);
    spec.models = {AssociationModel::Uniform};
    spec.engines = {Engine::MonteCarlo};
    spec.base_overrides = {{"gamma_th_db", "10"}};
    spec.series = {};
    for (const char* sigma : {"10", "20"}) {
      const std::string tag = std::string("sigma") + sigma;
      const std::string set = std::string("scatter_std:") + sigma;
      spec.series.push_back(series(tag + "_iid", {set}));
      spec.series.push_back(series(tag + "_los_ball", {"los_ball", set}));
      spec.series.push_back(series(tag + "_iid_no_noise", {"no_noise", set}));
    }
  } else if (id == "4a") {
    spec.axis = "mean_active";
    spec.values = detail::range(1, 10, 1);
    spec.engines = {Engine::MonteCarlo};
    spec.base_overrides = {{"scatter_std", "20"}, {"gamma_th_db", "20"}};
    spec.series = {series("full", {}), series("los_interference_only", {"los_interference_only"}),
                   series("nlos_interference_only", {"nlos_interference_only"}),
                   series("no_interference", {"no_interference"})};
  } else if (id == "4b") {
    spec.axis = "gamma_th_db";
    spec.values = detail::range(0, 40, 5);
    spec.engines = {Engine::Analytical};
    spec.base_overrides = {{"scatter_std", "10"}, {"mean_active", "3"}};
    spec.series = {series("rx_10dB_0dB_90deg", {}),
                   series("rx_20dB_0dB_90deg", {"rx_main_lobe_db:20"}),
                   series("rx_10dB_0dB_30deg", {"rx_beamwidth_deg:30"})};
  } else if (id == "5a") {
    spec.axis = "mean_active";
    spec.values = detail::range(1, 40, 1);
    spec.engines = {Engine::Analytical};
    spec.metric = Metric::Ase;
    spec.base_overrides = {{"scatter_std", "20"}};
    spec.series = {series("gamma_10dB", {"gamma_th_db:10"}), series("gamma_20dB", {"gamma_th_db:20"})};
  } else if (id == "5b") {
    spec.axis = "gamma_th_db";
    spec.values = detail::range(0, 40, 5);
    spec.models = {AssociationModel::Uniform};
    spec.engines = {Engine::Analytical};
    spec.base_overrides = {{"scatter_std", "30"}};
    spec.series = {};
    for (const char* s_bar : {"1", "3"}) {
      for (const char* ghz : {"28", "38", "60", "73"}) {
        spec.series.push_back(series(std::string(ghz) + "GHz_s" + s_bar,
                                     {std::string("frequency_preset:") + ghz, std::string("mean_active:") + s_bar}));
      }
    }
  } else {
    throw UsageError("unknown figure '" + std::string(id) + "' (expected 2a, 2b, 3a, 3b, 4a, 4b, 5a or 5b)");
  }
  return spec;
}

/// Parses a sweep description:
///   axis = mean_active
///   values = 1, 2, 3        (or first:last:step)
///   models = uniform, closest
///   engines = analytical, montecarlo
///   metric = coverage | ase
///   set.<config key> = value
///   series.<name> = option, option, key:value
inline SweepSpec parse_sweep_spec(std::string_view text) {
  SweepSpec spec;
  spec.series.clear();
  auto split = [](std::string_view s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto piece = detail::trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (!piece.empty()) parts.emplace_back(piece);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return parts;
  };
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
      const std::string key(detail::trim(line.substr(0, eq)));
      const std::string_view value = detail::trim(line.substr(eq + 1));
      try {
        if (key == "axis") {
          spec.axis = std::string(value);
        } else if (key == "values") {
          spec.values.clear();
          if (value.find(':') != std::string_view::npos && value.find(',') == std::string_view::npos) {
            std::vector<double> parts;
            std::size_t p = 0;
            while (p <= value.size()) {
              const auto c = value.find(':', p);
              const auto n = detail::to_number(value.substr(p, c == std::string_view::npos ? std::string_view::npos : c - p));
              if (!n) throw ParseError("bad range '" + std::string(value) + "'", line_no);
              parts.push_back(*n);
              if (c == std::string_view::npos) break;
              p = c + 1;
            }
            if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
              throw ParseError("range must be first:last:step with step > 0", line_no);
            }
            spec.values = detail::range(parts[0], parts[1], parts[2]);
          } else {
            for (const auto& p : split(value)) {
              const auto n = detail::to_number(p);
              if (!n) throw ParseError("bad number '" + p + "'", line_no);
              spec.values.push_back(*n);
            }
          }
        } else if (key == "models") {
          spec.models.clear();
          for (const auto& p : split(value)) spec.models.push_back(parse_association_model(p));
        } else if (key == "engines") {
          spec.engines.clear();
          for (const auto& p : split(value)) spec.engines.push_back(parse_engine(p));
        } else if (key == "metric") {
          if (value == "coverage") {
            spec.metric = Metric::Coverage;
          } else if (value == "ase") {
            spec.metric = Metric::Ase;
          } else {
            throw ParseError("metric must be coverage or ase", line_no);
          }
        } else if (key.rfind("set.", 0) == 0) {
          const std::string k = key.substr(4);
          if (!detail::is_config_key(k)) throw ParseError("unknown config key '" + k + "'", line_no);
          spec.base_overrides.emplace_back(k, std::string(value));
        } else if (key.rfind("series.", 0) == 0) {
          SweepSeries s;
          s.name = key.substr(7);
          for (const auto& p : split(value)) s.apply_token(p);
          spec.series.push_back(std::move(s));
        } else {
          throw ParseError("unknown sweep key '" + key + "'", line_no);
        }
      } catch (const UsageError& ex) {
        throw ParseError(ex.what(), line_no);
      }
    }
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  if (spec.series.empty()) spec.series.push_back(SweepSeries{});
  spec.validate();
  return spec;
}

}  // namespace d2d
