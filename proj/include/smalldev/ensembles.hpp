#pragma once

#include "smalldev/linalg.hpp"
#include "smalldev/rng.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smalldev {

/// m(theta) <= C * theta^(-alpha) for all theta > 0.
struct PowerEnvelope {
  double C;
  double alpha;
};

/// A nonnegative scalar random variable x, used as the weight in X = x * A.
class ScalarLaw {
 public:
  enum class Kind { exponential, gamma, bernoulli, uniform };

  static ScalarLaw exponential(double rate);
  static ScalarLaw gamma(double shape, double rate);
  static ScalarLaw bernoulli(double p);
  /// Uniform on [0, upper].
  static ScalarLaw uniform(double upper);

  Kind kind() const noexcept { return kind_; }
  double param1() const noexcept { return a_; }
  double param2() const noexcept { return b_; }

  double sample(RngStream& rng) const;
  /// E exp(-theta x), theta >= 0.
  double mgf(double theta) const;
  /// log E exp(-theta x), accurate where mgf underflows.
  double log_mgf(double theta) const;
  double mean() const;
  std::optional<double> support_bound() const;
  std::optional<PowerEnvelope> envelope() const;
  std::string describe() const;

  bool operator==(const ScalarLaw&) const = default;

 private:
  ScalarLaw(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_;
  double b_;
};

/// X = x * A for a fixed psd A.
struct ScaledFixed {
  HermitianMatrix matrix;
  ScalarLaw law;
  std::shared_ptr<const SpectralDecomposition> spectrum;
};

/// X = b * s * I with b ~ Bernoulli(p).
struct BernoulliDiagonal {
  std::size_t dim;
  double p;
  double scale;
};

/// X = L * u * w w* with w uniform on the complex unit sphere, u ~ U[0, 1].
struct BoundedRankOne {
  std::size_t dim;
  double bound;
};

/// X = (1/n) sum_j g_j g_j* with standard complex Gaussian g_j.
struct Wishart {
  std::size_t dim;
  std::size_t degrees;
};

class MatrixSource;

/// X (+) X: the same draw placed in both diagonal blocks.
struct BlockDoubled {
  std::shared_ptr<const MatrixSource> inner;
};

/// One random psd matrix factor. Immutable; safe to share across threads.
class MatrixSource {
 public:
  using Variant = std::variant<ScaledFixed, BernoulliDiagonal, BoundedRankOne, Wishart, BlockDoubled>;

  static MatrixSource scaled_fixed(const HermitianMatrix& a, const ScalarLaw& law);
  static MatrixSource bernoulli_diagonal(std::size_t dim, double p, double scale);
  static MatrixSource bounded_rank_one(std::size_t dim, double bound);
  static MatrixSource wishart(std::size_t dim, std::size_t degrees);
  static MatrixSource block_doubled(const MatrixSource& inner);

  std::size_t dim() const;
  const Variant& variant() const noexcept { return kind_; }
  std::string kind_name() const;

  HermitianMatrix sample(RngStream& rng) const;
  /// E X when closed-form.
  std::optional<HermitianMatrix> mean() const;
  /// L with lambda_max(X) <= L almost surely, when one exists.
  std::optional<double> uniform_bound() const;

 private:
  explicit MatrixSource(Variant v) : kind_(std::move(v)) {}
  Variant kind_;
};

HermitianMatrix sample(const MatrixSource& source, RngStream& rng);

/// An ordered list of K >= 1 independent sources of equal dimension.
class SumModel {
 public:
  explicit SumModel(std::vector<MatrixSource> sources);

  std::size_t size() const noexcept { return sources_.size(); }
  std::size_t dim() const noexcept { return sources_.front().dim(); }
  const std::vector<MatrixSource>& sources() const noexcept { return sources_; }
  const MatrixSource& operator[](std::size_t k) const { return sources_[k]; }

  /// Every source replaced by X (+) X.
  SumModel block_doubled() const;

 private:
  std::vector<MatrixSource> sources_;
};

/// One draw of sum_k X_k; source k draws from substream k of `rng`.
HermitianMatrix sample_sum(const SumModel& model, const RngStream& rng);

/// lambda_max of one draw of the sum, without building eigenvectors.
double sample_sum_lambda_max(const SumModel& model, const RngStream& rng);

}  // namespace smalldev
