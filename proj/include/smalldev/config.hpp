#pragma once

#include "smalldev/bounds.hpp"
#include "smalldev/ensembles.hpp"
#include "smalldev/mgf.hpp"
#include "smalldev/optimizer.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace smalldev {

inline const std::vector<std::string> kBoundNames = {"single",          "master",       "g_theta",
                                                     "log_mean",        "product",      "negative_moment",
                                                     "chernoff_sum",    "chernoff_product", "series_sum",
                                                     "series_product"};

/// Named built-in g(theta) family for the g_theta bound.
struct GSpec {
  std::string kind;  // exp_envelope | log_rate
  double param = 0.0;
};

struct BoundSpec {
  std::string name;
  double p = 1.0;                 // negative_moment
  std::optional<double> cp;       // negative_moment; defaults to admissible_cp
  std::optional<GSpec> g;         // g_theta
};

struct SimulationConfig {
  std::uint64_t n = 100000;
  double confidence = 0.99;
  std::uint64_t seed = 0;
};

struct OutputConfig {
  std::optional<std::string> csv_path;
  std::optional<std::string> json_path;
};

/// Command-line overrides applied on top of the file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<double> confidence;
  std::optional<double> theta_min;
  std::optional<double> theta_max;
  std::optional<int> coarse_points;
  std::optional<std::string> csv_path;
  std::optional<std::string> json_path;
};

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json ensemble;  // as written, for the echo
  std::vector<MatrixSource> sources;
  MgfModel mgf;
  std::vector<BoundSpec> bounds;
  std::vector<double> eps_grid;
  SimulationConfig simulation;
  OptimizerConfig optimizer;
  OutputConfig output;

  SumModel model() const { return SumModel(sources); }
  /// The fully resolved configuration (defaults filled, grid expanded, overrides applied).
  nlohmann::json resolved() const;
};

/// Parses and validates; throws ConfigError naming the first problem.
ExperimentConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Throws ConfigError if `spec` cannot be evaluated on `model` under `mgf`.
void check_applicable(const BoundSpec& spec, const SumModel& model, const MgfModel& mgf);

/// The Cp actually used by a negative_moment spec.
double resolved_cp(const BoundSpec& spec, const SumModel& model);

GThetaModel build_g_model(const GSpec& g, const SumModel& model);

}  // namespace smalldev
