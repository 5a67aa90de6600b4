#include "smalldev/cli.hpp"

#include "smalldev/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#ifndef SMALLDEV_CONFIG_DIR
#define SMALLDEV_CONFIG_DIR "configs"
#endif

namespace smalldev::cli {

using nlohmann::json;

unsigned thread_count_from_env() {
  const unsigned fallback = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("SMALLDEV_THREADS");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return fallback;
  return static_cast<unsigned>(v);
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Evaluation

BoundTable evaluate_bounds(const ExperimentConfig& cfg) {
  const SumModel model = cfg.model();
  std::unique_ptr<MgfSnapshot> snapshot;
  auto mgf = [&]() -> const MgfSnapshot& {
    if (!snapshot) snapshot = std::make_unique<MgfSnapshot>(model, cfg.mgf);
    return *snapshot;
  };
  const auto& opt = cfg.optimizer;

  BoundTable table;
  for (const auto& spec : cfg.bounds) {
    std::vector<BoundResult> results;
    results.reserve(cfg.eps_grid.size());
    std::optional<GThetaModel> gmodel;
    if (spec.name == "g_theta") gmodel = build_g_model(*spec.g, model);
    const double cp = spec.name == "negative_moment" ? resolved_cp(spec, model) : 0.0;
    for (const double eps : cfg.eps_grid) {
      if (spec.name == "single") {
        results.push_back(min_single_bound(mgf(), eps, opt));
      } else if (spec.name == "master") {
        results.push_back(master_bound(mgf(), eps, opt));
      } else if (spec.name == "g_theta") {
        results.push_back(g_theta_bound(*gmodel, eps, opt));
      } else if (spec.name == "log_mean") {
        results.push_back(log_mean_bound(mgf(), eps, opt));
      } else if (spec.name == "product") {
        results.push_back(product_of_single_bounds(mgf(), eps, opt));
      } else if (spec.name == "negative_moment") {
        results.push_back(negative_moment_bound(cp, spec.p, eps));
      } else if (spec.name == "chernoff_sum") {
        results.push_back(chernoff_sum_bound(model, eps));
      } else if (spec.name == "chernoff_product") {
        results.push_back(chernoff_product_bound(model, eps));
      } else if (spec.name == "series_sum") {
        results.push_back(series_sum_bound(model, eps));
      } else if (spec.name == "series_product") {
        results.push_back(series_product_bound(model, eps));
      } else {
        throw ConfigError("unknown bound '" + spec.name + "'");
      }
    }
    table.emplace_back(spec.name, std::move(results));
  }
  return table;
}

std::vector<EmpiricalEstimate> run_simulation(const ExperimentConfig& cfg, unsigned threads) {
  EstimateOptions options;
  options.n = cfg.simulation.n;
  options.confidence = cfg.simulation.confidence;
  options.seed = cfg.simulation.seed;
  options.threads = threads;
  return estimate(cfg.model(), cfg.eps_grid, options);
}

// ---------------------------------------------------------------------------
// Reports

void write_bounds_csv(std::ostream& out, const BoundTable& table) {
  out << "epsilon,bound,value,raw_value,theta_star,valid\n";
  for (const auto& [name, results] : table) {
    for (const auto& r : results) {
      out << format_number(r.epsilon) << ',' << name << ',' << format_number(r.value) << ','
          << format_number(r.raw_value) << ',' << (r.theta_star ? format_number(*r.theta_star) : "") << ','
          << (r.valid ? "true" : "false") << '\n';
    }
  }
}

void write_estimates_csv(std::ostream& out, const std::vector<EmpiricalEstimate>& estimates) {
  out << "epsilon,n,hits,p_hat,ci_low,ci_high\n";
  for (const auto& e : estimates) {
    out << format_number(e.epsilon) << ',' << e.n << ',' << e.hits << ',' << format_number(e.p_hat) << ','
        << format_number(e.ci_low) << ',' << format_number(e.ci_high) << '\n';
  }
}

void write_report_csv(std::ostream& out, const DominationReport& report) {
  out << "epsilon,bound,bound_value,p_hat,ci_low,ci_high,dominated\n";
  for (const auto& r : report.rows) {
    out << format_number(r.epsilon) << ',' << r.bound_name << ',' << format_number(r.bound_value) << ','
        << format_number(r.p_hat) << ',' << format_number(r.ci_low) << ',' << format_number(r.ci_high) << ','
        << (r.dominated ? "true" : "false") << '\n';
  }
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json bounds_json(const ExperimentConfig& cfg, const BoundTable& table) {
  json results = json::array();
  for (const auto& [name, rows] : table) {
    for (const auto& r : rows) {
      json details = json::object();
      for (const auto& [k, v] : r.details) details[k] = finite_or_null(v);
      results.push_back({{"bound", name},
                         {"epsilon", r.epsilon},
                         {"value", r.value},
                         {"raw_value", finite_or_null(r.raw_value)},
                         {"theta_star", r.theta_star ? json(*r.theta_star) : json(nullptr)},
                         {"valid", r.valid},
                         {"trivial", r.trivial},
                         {"details", details}});
    }
  }
  return {{"experiment", cfg.experiment}, {"results", results}, {"config_echo", cfg.resolved()}};
}

json estimates_json(const ExperimentConfig& cfg, const std::vector<EmpiricalEstimate>& estimates) {
  json rows = json::array();
  for (const auto& e : estimates) {
    rows.push_back({{"epsilon", e.epsilon},
                    {"n", e.n},
                    {"hits", e.hits},
                    {"p_hat", e.p_hat},
                    {"ci_low", e.ci_low},
                    {"ci_high", e.ci_high},
                    {"confidence", e.confidence}});
  }
  return {{"experiment", cfg.experiment}, {"estimates", rows}, {"config_echo", cfg.resolved()}};
}

json report_json(const ExperimentConfig& cfg, const DominationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"epsilon", r.epsilon},
                    {"bound", r.bound_name},
                    {"bound_value", r.bound_value},
                    {"p_hat", r.p_hat},
                    {"ci_low", r.ci_low},
                    {"ci_high", r.ci_high},
                    {"dominated", r.dominated}});
  }
  return {{"experiment", cfg.experiment},
          {"rows", rows},
          {"violations", report.violations},
          {"config_echo", cfg.resolved()}};
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::string csv_text(const auto& writer, const auto& data) {
  std::ostringstream out;
  writer(out, data);
  return out.str();
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

DominationReport compare_pipeline(const ExperimentConfig& cfg, const RunOptions& run) {
  BoundTable table = evaluate_bounds(cfg);
  if (run.scale_bounds != 1.0) {
    for (auto& [name, rows] : table) {
      for (auto& r : rows) r.value = std::clamp(r.value * run.scale_bounds, 0.0, 1.0);
    }
  }
  const auto estimates = run_simulation(cfg, run.threads);
  return compare(table, estimates);
}

}  // namespace

int cmd_bound(const ExperimentConfig& cfg) {
  const BoundTable table = evaluate_bounds(cfg);
  const std::string csv = csv_text(write_bounds_csv, table);
  if (cfg.output.csv_path) {
    write_file(*cfg.output.csv_path, csv);
  } else if (!cfg.output.json_path) {
    std::cout << csv;
  }
  if (cfg.output.json_path) write_file(*cfg.output.json_path, json_text(bounds_json(cfg, table)));
  return kOk;
}

int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& run) {
  const auto estimates = run_simulation(cfg, run.threads);
  const std::string csv = csv_text(write_estimates_csv, estimates);
  if (cfg.output.csv_path) {
    write_file(*cfg.output.csv_path, csv);
  } else if (!cfg.output.json_path) {
    std::cout << csv;
  }
  if (cfg.output.json_path) write_file(*cfg.output.json_path, json_text(estimates_json(cfg, estimates)));
  return kOk;
}

int cmd_compare(const ExperimentConfig& cfg, const RunOptions& run) {
  const DominationReport report = compare_pipeline(cfg, run);
  const std::string text = json_text(report_json(cfg, report));
  if (cfg.output.json_path) {
    write_file(*cfg.output.json_path, text);
  } else {
    std::cout << text;
  }
  if (cfg.output.csv_path) write_file(*cfg.output.csv_path, csv_text(write_report_csv, report));
  return report.violations == 0 ? kOk : kViolation;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<double> confidence;
  std::optional<double> theta_min;
  std::optional<double> theta_max;
  std::optional<int> coarse_points;
  std::optional<std::string> csv;
  std::optional<std::string> json;
  double scale_bounds = 1.0;

  ConfigOverrides overrides() const {
    return {seed, samples, confidence, theta_min, theta_max, coarse_points, csv, json};
  }
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* config = cmd->add_option("--config", f.config_path, "Experiment config (JSON)");
  if (needs_config) config->required();
  cmd->add_option("--seed", f.seed, "Override simulation.seed");
  cmd->add_option("--samples", f.samples, "Override simulation.n");
  cmd->add_option("--confidence", f.confidence, "Override simulation.confidence");
  cmd->add_option("--theta-min", f.theta_min, "Optimizer lower theta");
  cmd->add_option("--theta-max", f.theta_max, "Optimizer upper theta");
  cmd->add_option("--coarse-points", f.coarse_points, "Optimizer coarse grid size");
  cmd->add_option("--csv", f.csv, "CSV output path");
  cmd->add_option("--json", f.json, "JSON output path");
  cmd->add_option("--scale-bounds", f.scale_bounds, "Debug: multiply bound values before comparing");
}

int run_demo(const std::string& dir, const std::optional<std::string>& out_dir, const CommonFlags& flags,
             const RunOptions& run) {
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw ConfigError("no demo configs found in '" + dir + "'");
  if (out_dir) std::filesystem::create_directories(*out_dir);

  int status = kOk;
  for (const auto& path : configs) {
    ConfigOverrides ov = flags.overrides();
    ov.csv_path.reset();
    ov.json_path.reset();
    ExperimentConfig cfg = load_config(path.string(), ov);
    const DominationReport report = compare_pipeline(cfg, run);
    if (out_dir) {
      const auto stem = (std::filesystem::path(*out_dir) / cfg.experiment).string();
      write_file(stem + ".json", json_text(report_json(cfg, report)));
      write_file(stem + ".csv", csv_text(write_report_csv, report));
    }
    std::cout << cfg.experiment << ": " << report.rows.size() << " rows, " << report.violations << " violations\n";
    if (report.violations != 0) status = kViolation;
  }
  return status;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Small-deviation bounds for lambda_max of sums of random psd matrices"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* bound = app.add_subcommand("bound", "Evaluate the requested bounds over the epsilon grid");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates with Clopper-Pearson intervals");
  auto* compare = app.add_subcommand("compare", "Check every bound against the Monte Carlo lower limits");
  auto* demo = app.add_subcommand("demo", "Run compare on every bundled config");
  add_common(bound, flags, true);
  add_common(simulate, flags, true);
  add_common(compare, flags, true);
  add_common(demo, flags, false);
  std::string config_dir = SMALLDEV_CONFIG_DIR;
  std::optional<std::string> out_dir;
  demo->add_option("--config-dir", config_dir, "Directory of bundled configs");
  demo->add_option("--out-dir", out_dir, "Write <experiment>.json/.csv reports here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  RunOptions run;
  run.scale_bounds = flags.scale_bounds;
  run.threads = thread_count_from_env();
  try {
    if (*demo) return run_demo(config_dir, out_dir, flags, run);
    const ExperimentConfig cfg = load_config(flags.config_path, flags.overrides());
    if (*bound) return cmd_bound(cfg);
    if (*simulate) return cmd_simulate(cfg, run);
    return cmd_compare(cfg, run);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace smalldev::cli
