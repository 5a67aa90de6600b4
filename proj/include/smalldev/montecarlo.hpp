#pragma once

#include "smalldev/bounds.hpp"
#include "smalldev/ensembles.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smalldev {

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double x, double a, double b);

/// x with I_x(a, b) = q, by bisection; absolute error below 1e-13.
double beta_quantile(double q, double a, double b);

struct Interval {
  double low;
  double high;
};

/// Exact two-sided binomial interval from Beta quantiles.
Interval clopper_pearson(std::uint64_t hits, std::uint64_t n, double confidence);

/// Monte Carlo estimate of P{lambda_max(sum_k X_k) <= epsilon}.
struct EmpiricalEstimate {
  double epsilon;
  std::uint64_t n;
  std::uint64_t hits;
  double p_hat;
  double ci_low;
  double ci_high;
  double confidence;
};

struct EstimateOptions {
  std::uint64_t n = 100000;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/**
 * One shared pool of n draws of lambda_max(sum_k X_k) scored against every
 * epsilon. Draw j uses RngStream(seed, j), so hits are identical for any
 * thread count.
 */
std::vector<EmpiricalEstimate> estimate(const SumModel& model, std::span<const double> eps_grid,
                                        const EstimateOptions& options);

/// The raw draws behind `estimate`, in draw order.
std::vector<double> sample_lambda_max(const SumModel& model, std::uint64_t n, std::uint64_t seed, unsigned threads);

struct DominationRow {
  double epsilon;
  std::string bound_name;
  double bound_value;
  double p_hat;
  double ci_low;
  double ci_high;
  bool dominated;
};

struct DominationReport {
  std::vector<DominationRow> rows;
  std::size_t violations = 0;
};

/// Per bound name, one BoundResult per grid point (same order as the estimates).
using BoundTable = std::vector<std::pair<std::string, std::vector<BoundResult>>>;

/// Flags rows where bound.value < ci_low. Throws std::invalid_argument on grid mismatch.
DominationReport compare(const BoundTable& bounds, std::span<const EmpiricalEstimate> estimates);

}  // namespace smalldev
