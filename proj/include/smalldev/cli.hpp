#pragma once

#include "smalldev/config.hpp"
#include "smalldev/montecarlo.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace smalldev::cli {

enum ExitCode : int {
  kOk = 0,
  kViolation = 1,
  kConfigError = 2,
  kNumericalError = 3,
};

/// Worker count from SMALLDEV_THREADS (unset or invalid: hardware concurrency).
unsigned thread_count_from_env();

/// Every requested bound at every grid point, in config order.
BoundTable evaluate_bounds(const ExperimentConfig& cfg);

std::vector<EmpiricalEstimate> run_simulation(const ExperimentConfig& cfg, unsigned threads);

/// %.17g.
std::string format_number(double x);

void write_bounds_csv(std::ostream& out, const BoundTable& table);
void write_estimates_csv(std::ostream& out, const std::vector<EmpiricalEstimate>& estimates);
void write_report_csv(std::ostream& out, const DominationReport& report);

nlohmann::json bounds_json(const ExperimentConfig& cfg, const BoundTable& table);
nlohmann::json estimates_json(const ExperimentConfig& cfg, const std::vector<EmpiricalEstimate>& estimates);
/// {experiment, rows[], violations, config_echo}.
nlohmann::json report_json(const ExperimentConfig& cfg, const DominationReport& report);

struct RunOptions {
  double scale_bounds = 1.0;
  unsigned threads = 0;
};

int cmd_bound(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& run);
int cmd_compare(const ExperimentConfig& cfg, const RunOptions& run);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace smalldev::cli
