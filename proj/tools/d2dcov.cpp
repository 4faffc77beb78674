// d2dcov: coverage and ASE of clustered D2D mmWave networks.
//
//   d2dcov coverage --model closest --engine analytical,montecarlo
//   d2dcov sweep --figure 2a --trials 100000 --out fig2a.csv
//   d2dcov validate --seed 42
//   d2dcov optimize-s --gamma-db 10 --gamma-db 20
//
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
// non-convergence.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d2d/d2d.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 1;
  long trials = 100000;
  int threads = 1;
  std::string out;
  std::vector<std::string> overrides;  // key=value
};

d2d::ConfigSource load_config(const GlobalOptions& g) {
  d2d::ConfigSource source = g.config.empty() ? d2d::ConfigSource{} : d2d::read_config_source(g.config);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw d2d::UsageError("--set expects key=value, got '" + kv + "'");
    source.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return source;
}

// Writes to --out when given, stdout otherwise.
void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(g.out, std::ios::binary);
  if (!file) throw d2d::UsageError("cannot write '" + g.out + "'");
  file << text;
  if (!file) throw d2d::UsageError("write to '" + g.out + "' failed");
}

std::vector<d2d::AssociationModel> parse_models(const std::vector<std::string>& names) {
  std::vector<d2d::AssociationModel> models;
  for (const auto& n : names) {
    if (n == "all") return {d2d::kAllModels.begin(), d2d::kAllModels.end()};
    models.push_back(d2d::parse_association_model(n));
  }
  return models;
}

d2d::SweepSettings sweep_settings(const GlobalOptions& g) {
  d2d::SweepSettings s;
  s.n_trials = g.trials;
  s.seed = g.seed;
  s.threads = g.threads;
  return s;
}

std::string to_csv(const std::vector<d2d::SweepRow>& rows) {
  std::ostringstream out;
  d2d::write_sweep_csv(out, rows);
  return out.str();
}

// Any evaluation failure in the rows maps to the matching exit code.
int rows_status(const std::vector<d2d::SweepRow>& rows) {
  for (const auto& r : rows) {
    if (!r.error.empty()) return kExitNumerical;
  }
  return 0;
}

struct PointOptions {
  std::vector<std::string> models{"all"};
  std::vector<std::string> engines{"analytical"};
  std::vector<std::string> series;
  std::optional<double> gamma_db;
};

void add_point_options(CLI::App* cmd, PointOptions& p) {
  cmd->add_option("--model", p.models, "uniform, closest, closest_los or all")->delimiter(',');
  cmd->add_option("--engine", p.engines, "analytical, analytical_approx, lower_bound, montecarlo")->delimiter(',');
  cmd->add_option("--variant", p.series, "series options, e.g. intra_only,no_noise")->delimiter(',');
  cmd->add_option("--gamma-db", p.gamma_db, "SINR threshold in dB (default: config)");
}

int run_point(const GlobalOptions& g, const PointOptions& p, d2d::Metric metric) {
  const d2d::ConfigSource source = load_config(g);
  source.build();  // report configuration errors before any evaluation
  d2d::SweepSpec spec;
  spec.axis = "gamma_th_db";
  spec.values = {p.gamma_db.value_or(source.gamma_th_db())};
  spec.models = parse_models(p.models);
  spec.engines.clear();
  for (const auto& e : p.engines) spec.engines.push_back(d2d::parse_engine(e));
  spec.metric = metric;
  d2d::SweepSeries series;
  if (!p.series.empty()) series.name = "variant";
  for (const auto& t : p.series) series.apply_token(t);
  spec.series = {series};
  const auto rows = d2d::run_sweep(source, spec, sweep_settings(g));
  emit(g, to_csv(rows));
  return rows_status(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage probability and area spectral efficiency of clustered D2D mmWave networks"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "configuration file (key = value)");
  app.add_option("--seed", g.seed, "Monte Carlo seed");
  app.add_option("--trials", g.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--out", g.out, "output file (default: stdout)");
  app.add_option("--set", g.overrides, "configuration override key=value (repeatable)");

  PointOptions coverage_opts;
  auto* coverage_cmd = app.add_subcommand("coverage", "coverage probability at one threshold");
  add_point_options(coverage_cmd, coverage_opts);

  PointOptions ase_opts;
  auto* ase_cmd = app.add_subcommand("ase", "area spectral efficiency at one threshold");
  add_point_options(ase_cmd, ase_opts);

  std::string figure;
  std::string spec_file;
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep written as CSV");
  auto* figure_opt = sweep_cmd->add_option("--figure", figure, "built-in sweep: 2a 2b 3a 3b 4a 4b 5a 5b");
  auto* spec_opt = sweep_cmd->add_option("--spec", spec_file, "sweep description file");
  figure_opt->excludes(spec_opt);
  spec_opt->excludes(figure_opt);

  d2d::ValidationSettings vs;
  bool full = false;
  std::optional<long> laplace_trials;
  auto* validate_cmd = app.add_subcommand("validate", "run the cross-validation checks");
  validate_cmd->add_option("--tol-scale", vs.tol_scale, "multiply every tolerance (0 forces failures)")
      ->check(CLI::NonNegativeNumber);
  validate_cmd->add_flag("--full", full, "full grids and trial counts");
  validate_cmd->add_option("--laplace-trials", laplace_trials, "trials per Laplace oracle")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> opt_models{"all"};
  std::vector<double> opt_gammas;
  bool opt_approx = false;
  auto* optimize_cmd = app.add_subcommand("optimize-s", "mean active count maximising ASE");
  optimize_cmd->add_option("--model", opt_models, "uniform, closest, closest_los or all")->delimiter(',');
  optimize_cmd->add_option("--gamma-db", opt_gammas, "threshold(s) in dB (default: config)");
  optimize_cmd->add_flag("--approx", opt_approx, "drop the cluster-centre conditioning (faster)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*coverage_cmd) return run_point(g, coverage_opts, d2d::Metric::Coverage);
    if (*ase_cmd) return run_point(g, ase_opts, d2d::Metric::Ase);

    if (*sweep_cmd) {
      if (figure.empty() && spec_file.empty()) throw d2d::UsageError("sweep needs --figure or --spec");
      d2d::SweepSpec spec;
      if (!figure.empty()) {
        spec = d2d::figure_spec(figure);
      } else {
        std::ifstream in(spec_file);
        if (!in) throw d2d::UsageError("cannot open sweep spec '" + spec_file + "'");
        std::ostringstream text;
        text << in.rdbuf();
        spec = d2d::parse_sweep_spec(text.str());
      }
      const auto rows = d2d::run_sweep(load_config(g), spec, sweep_settings(g));
      emit(g, to_csv(rows));
      return 0;
    }

    if (*validate_cmd) {
      vs.seed = g.seed;
      vs.threads = g.threads;
      vs.full = full;
      const bool trials_given = app.get_option("--trials")->count() > 0;
      if (full) {
        vs.n_trials = trials_given ? g.trials : 100000;
        vs.laplace_trials = laplace_trials.value_or(1000000);
      } else {
        if (trials_given) vs.n_trials = g.trials;
        if (laplace_trials) vs.laplace_trials = *laplace_trials;
      }
      const auto results = d2d::run_validation(vs);
      emit(g, d2d::format_report(results, vs));
      return d2d::all_passed(results) ? 0 : kExitValidation;
    }

    if (*optimize_cmd) {
      const d2d::ConfigSource source = load_config(g);
      const d2d::NetworkConfig cfg = source.build();
      if (opt_gammas.empty()) opt_gammas = {source.gamma_th_db()};
      std::vector<double> linear;
      for (double db : opt_gammas) linear.push_back(d2d::db_to_linear(db));
      d2d::CoverageFlags flags;
      flags.use_assumption1 = opt_approx;
      std::ostringstream out;
      out << "model,gamma_th_db,optimal_mean_active,ase,is_upper_bound\n";
      for (auto model : parse_models(opt_models)) {
        const auto best = d2d::optimize_mean_active(model, linear, flags, cfg);
        for (std::size_t i = 0; i < best.size(); ++i) {
          out << d2d::to_string(model) << ',' << d2d::format_number(opt_gammas[i]) << ',' << best[i].mean_active
              << ',' << d2d::format_number(best[i].ase) << ",true\n";
        }
      }
      emit(g, out.str());
      return 0;
    }
  } catch (const d2d::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const d2d::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
