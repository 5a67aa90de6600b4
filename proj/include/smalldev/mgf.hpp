#pragma once

#include "smalldev/ensembles.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace smalldev {

/// How E exp(-theta X) is evaluated.
struct MgfModel {
  enum class Mode { analytic, empirical };

  Mode mode = Mode::analytic;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;

  static MgfModel analytic() { return {}; }
  static MgfModel empirical(std::size_t n, std::uint64_t seed) { return {Mode::empirical, n, seed}; }
};

bool has_analytic_mgf(const MatrixSource& source);

/// Closed-form E exp(-theta X). Throws Unavailable for bounded_rank_one and wishart.
HermitianMatrix analytic_mgf(const MatrixSource& source, double theta);

/// Closed-form log E exp(-theta X), computed from log m so it stays finite
/// where the mgf itself underflows.
HermitianMatrix analytic_log_mgf(const MatrixSource& source, double theta);

/// (1/n) sum_j expm(-theta X_j) over n fresh draws from `rng`.
HermitianMatrix empirical_mgf(const MatrixSource& source, double theta, std::size_t n, RngStream& rng);

/// E exp(-theta X) represented as exp(shift) * scaled, with lambda_max(scaled) <= 1.
struct ScaledMgf {
  HermitianMatrix scaled;
  double shift;
};

/**
 * mgf evaluator bound to one source.
 *
 * In empirical mode the draws are taken once at construction and reused for
 * every theta, so the objective is a smooth function of theta.
 */
class SourceMgf {
 public:
  static SourceMgf analytic(const MatrixSource& source);
  static SourceMgf empirical(const MatrixSource& source, std::size_t n, RngStream rng);

  std::size_t dim() const noexcept { return dim_; }
  bool is_empirical() const noexcept { return values_ != nullptr; }

  HermitianMatrix mgf(double theta) const;
  ScaledMgf scaled_mgf(double theta) const;
  /// log E exp(-theta X); throws NotPositiveDefinite if an estimate is singular.
  HermitianMatrix log_mgf(double theta) const;
  /// log((1/d) E tr exp(-theta X)).
  double log_mean_trace(double theta) const;

 private:
  SourceMgf() = default;

  std::size_t dim_ = 0;
  std::shared_ptr<const MatrixSource> source_;
  // Empirical snapshot: every sample's eigenvectors side by side (d x n*d),
  // the matching eigenvalues, and the smallest eigenvalue overall.
  std::shared_ptr<const ComplexMatrix> vectors_;
  std::shared_ptr<const RealVector> values_;
  double min_value_ = 0.0;
  std::size_t n_ = 0;
};

/**
 * Per-source mgf evaluators for a whole SumModel, with memoized
 * theta -> exponent tables shared by every epsilon evaluated against it.
 * Thread-safe.
 */
class MgfSnapshot {
 public:
  MgfSnapshot(const SumModel& model, const MgfModel& config);

  std::size_t size() const noexcept { return sources_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const SourceMgf& operator[](std::size_t k) const { return sources_[k]; }
  const MgfModel& config() const noexcept { return config_; }

  /// lambda_max(sum_k log E exp(-theta X_k)).
  double master_exponent(double theta) const;
  /// K * log lambda_max((1/K) sum_k E exp(-theta X_k)).
  double log_mean_exponent(double theta) const;

 private:
  std::vector<SourceMgf> sources_;
  std::size_t dim_;
  MgfModel config_;

  mutable std::mutex cache_mutex_;
  mutable std::map<double, double> master_cache_;
  mutable std::map<double, double> log_mean_cache_;
};

/// Stream id base for empirical mgf draws, disjoint from Monte Carlo sample ids.
inline constexpr std::uint64_t kMgfStreamBase = 0x4D47460000000000ull;

}  // namespace smalldev
