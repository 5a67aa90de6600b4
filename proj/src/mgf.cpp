#include "smalldev/mgf.hpp"

#include "smalldev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace smalldev {

namespace {

/// log E exp(-theta X) in the form basis * diag(log_values) * basis*.
struct LogSpectrum {
  ComplexMatrix basis;
  RealVector log_values;
};

LogSpectrum analytic_log_spectrum(const MatrixSource& source, double theta) {
  const auto& v = source.variant();
  if (const auto* s = std::get_if<ScaledFixed>(&v)) {
    const auto& ev = s->spectrum->eigenvalues;
    RealVector l(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) l(i) = s->law.log_mgf(theta * std::max(ev(i), 0.0));
    return {s->spectrum->eigenvectors, std::move(l)};
  }
  if (const auto* s = std::get_if<BernoulliDiagonal>(&v)) {
    const double l = ScalarLaw::bernoulli(s->p).log_mgf(theta * s->scale);
    return {ComplexMatrix::Identity(s->dim, s->dim), RealVector::Constant(s->dim, l)};
  }
  if (const auto* s = std::get_if<BlockDoubled>(&v)) {
    const LogSpectrum inner = analytic_log_spectrum(*s->inner, theta);
    const auto d = inner.basis.rows();
    LogSpectrum out{ComplexMatrix::Zero(2 * d, 2 * d), RealVector(2 * d)};
    out.basis.topLeftCorner(d, d) = inner.basis;
    out.basis.bottomRightCorner(d, d) = inner.basis;
    out.log_values << inner.log_values, inner.log_values;
    return out;
  }
  throw Unavailable("no closed-form mgf for " + source.kind_name() + " sources");
}

HermitianMatrix reassemble(const ComplexMatrix& basis, const RealVector& values) {
  return HermitianMatrix(ComplexMatrix(basis * values.cast<Complex>().asDiagonal() * basis.adjoint()));
}

double log_sum_exp(const RealVector& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

void require_theta(double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    std::ostringstream msg;
    msg << "mgf requires theta >= 0, got " << theta;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

bool has_analytic_mgf(const MatrixSource& source) {
  const auto& v = source.variant();
  if (std::holds_alternative<ScaledFixed>(v) || std::holds_alternative<BernoulliDiagonal>(v)) return true;
  if (const auto* s = std::get_if<BlockDoubled>(&v)) return has_analytic_mgf(*s->inner);
  return false;
}

HermitianMatrix analytic_mgf(const MatrixSource& source, double theta) {
  require_theta(theta);
  const LogSpectrum ls = analytic_log_spectrum(source, theta);
  return reassemble(ls.basis, ls.log_values.array().exp().matrix());
}

HermitianMatrix analytic_log_mgf(const MatrixSource& source, double theta) {
  require_theta(theta);
  const LogSpectrum ls = analytic_log_spectrum(source, theta);
  return reassemble(ls.basis, ls.log_values);
}

HermitianMatrix empirical_mgf(const MatrixSource& source, double theta, std::size_t n, RngStream& rng) {
  require_theta(theta);
  if (n < 1) throw std::invalid_argument("empirical_mgf needs at least one sample");
  ComplexMatrix total = ComplexMatrix::Zero(source.dim(), source.dim());
  for (std::size_t j = 0; j < n; ++j) {
    total += expm(source.sample(rng) * (-theta)).entries();
  }
  return HermitianMatrix(ComplexMatrix(total / static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// SourceMgf

SourceMgf SourceMgf::analytic(const MatrixSource& source) {
  if (!has_analytic_mgf(source)) {
    throw Unavailable("no closed-form mgf for " + source.kind_name() + " sources");
  }
  SourceMgf out;
  out.dim_ = source.dim();
  out.source_ = std::make_shared<const MatrixSource>(source);
  return out;
}

SourceMgf SourceMgf::empirical(const MatrixSource& source, std::size_t n, RngStream rng) {
  if (n < 1) throw std::invalid_argument("empirical mgf needs at least one sample");
  const auto d = static_cast<Eigen::Index>(source.dim());
  auto vectors = std::make_shared<ComplexMatrix>(d, d * static_cast<Eigen::Index>(n));
  auto values = std::make_shared<RealVector>(d * static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto eig = spectral_decompose(source.sample(rng));
    const auto col = static_cast<Eigen::Index>(j) * d;
    vectors->middleCols(col, d) = eig.eigenvectors;
    values->segment(col, d) = eig.eigenvalues;
  }
  SourceMgf out;
  out.dim_ = source.dim();
  out.source_ = std::make_shared<const MatrixSource>(source);
  out.min_value_ = values->minCoeff();
  out.n_ = n;
  out.vectors_ = std::move(vectors);
  out.values_ = std::move(values);
  return out;
}

ScaledMgf SourceMgf::scaled_mgf(double theta) const {
  require_theta(theta);
  if (!is_empirical()) {
    const LogSpectrum ls = analytic_log_spectrum(*source_, theta);
    const double shift = ls.log_values.maxCoeff();
    return {reassemble(ls.basis, (ls.log_values.array() - shift).exp().matrix()), shift};
  }
  // exp(-theta lambda) = exp(-theta min) * exp(-theta (lambda - min)); weights <= 1/n.
  const RealVector weights =
      ((values_->array() - min_value_) * (-theta)).exp().matrix() / static_cast<double>(n_);
  const ComplexMatrix weighted = (*vectors_) * weights.cast<Complex>().asDiagonal();
  return {HermitianMatrix(ComplexMatrix(weighted * vectors_->adjoint())), -theta * min_value_};
}

HermitianMatrix SourceMgf::mgf(double theta) const {
  const ScaledMgf s = scaled_mgf(theta);
  return s.scaled * std::exp(s.shift);
}

HermitianMatrix SourceMgf::log_mgf(double theta) const {
  if (!is_empirical()) return analytic_log_mgf(*source_, theta);
  const ScaledMgf s = scaled_mgf(theta);
  return logm(s.scaled) + HermitianMatrix::identity(dim_) * s.shift;
}

double SourceMgf::log_mean_trace(double theta) const {
  require_theta(theta);
  if (!is_empirical()) {
    const LogSpectrum ls = analytic_log_spectrum(*source_, theta);
    return log_sum_exp(ls.log_values) - std::log(static_cast<double>(dim_));
  }
  const RealVector shifted = (values_->array() - min_value_) * (-theta);
  return -theta * min_value_ + log_sum_exp(shifted) - std::log(static_cast<double>(values_->size()));
}

// ---------------------------------------------------------------------------
// MgfSnapshot

MgfSnapshot::MgfSnapshot(const SumModel& model, const MgfModel& config)
    : dim_(model.dim()), config_(config) {
  sources_.reserve(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    if (config.mode == MgfModel::Mode::analytic) {
      sources_.push_back(SourceMgf::analytic(model[k]));
    } else {
      sources_.push_back(SourceMgf::empirical(model[k], config.samples, RngStream(config.seed, kMgfStreamBase + k)));
    }
  }
}

double MgfSnapshot::master_exponent(double theta) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = master_cache_.find(theta); it != master_cache_.end()) return it->second;
  }
  HermitianMatrix total = sources_.front().log_mgf(theta);
  for (std::size_t k = 1; k < sources_.size(); ++k) total = total + sources_[k].log_mgf(theta);
  const double value = lambda_max(total);
  std::lock_guard lock(cache_mutex_);
  master_cache_.emplace(theta, value);
  return value;
}

double MgfSnapshot::log_mean_exponent(double theta) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = log_mean_cache_.find(theta); it != log_mean_cache_.end()) return it->second;
  }
  std::vector<ScaledMgf> parts;
  parts.reserve(sources_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : sources_) {
    parts.push_back(s.scaled_mgf(theta));
    top = std::max(top, parts.back().shift);
  }
  ComplexMatrix avg = ComplexMatrix::Zero(dim_, dim_);
  for (const auto& p : parts) avg += p.scaled.entries() * std::exp(p.shift - top);
  avg /= static_cast<double>(sources_.size());
  const double lmax = lambda_max(HermitianMatrix(avg));
  const double value = static_cast<double>(sources_.size()) * (std::log(lmax) + top);
  std::lock_guard lock(cache_mutex_);
  log_mean_cache_.emplace(theta, value);
  return value;
}

}  // namespace smalldev
