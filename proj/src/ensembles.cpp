#include "smalldev/ensembles.hpp"

#include "smalldev/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace smalldev {

// ---------------------------------------------------------------------------
// ScalarLaw

ScalarLaw ScalarLaw::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("exponential rate must be > 0");
  return {Kind::exponential, rate, 0.0};
}

ScalarLaw ScalarLaw::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw std::invalid_argument("gamma shape must be > 0");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("gamma rate must be > 0");
  return {Kind::gamma, shape, rate};
}

ScalarLaw ScalarLaw::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli p must lie in [0, 1]");
  return {Kind::bernoulli, p, 0.0};
}

ScalarLaw ScalarLaw::uniform(double upper) {
  if (!(upper > 0.0) || !std::isfinite(upper)) throw std::invalid_argument("uniform upper end must be > 0");
  return {Kind::uniform, upper, 0.0};
}

double ScalarLaw::sample(RngStream& rng) const {
  switch (kind_) {
    case Kind::exponential:
      return -std::log(rng.uniform_open_low()) / a_;
    case Kind::gamma: {
      std::gamma_distribution<double> dist(a_, 1.0 / b_);
      return dist(rng);
    }
    case Kind::bernoulli:
      return rng.uniform() < a_ ? 1.0 : 0.0;
    case Kind::uniform:
      return a_ * rng.uniform();
  }
  return 0.0;
}

double ScalarLaw::mgf(double theta) const { return std::exp(log_mgf(theta)); }

double ScalarLaw::log_mgf(double theta) const {
  if (theta <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::exponential:
      return -std::log1p(theta / a_);
    case Kind::gamma:
      return -a_ * std::log1p(theta / b_);
    case Kind::bernoulli: {
      const double p = a_;
      if (p == 0.0) return 0.0;
      if (p == 1.0) return -theta;
      // log((1-p) + p e^{-theta}) as a log-sum-exp of two terms.
      const double lo = std::log1p(-p);
      const double hi = std::log(p) - theta;
      const double m = std::max(lo, hi);
      return m + std::log1p(std::exp(std::min(lo, hi) - m));
    }
    case Kind::uniform: {
      const double t = theta * a_;
      return std::log(-std::expm1(-t)) - std::log(t);
    }
  }
  return 0.0;
}

double ScalarLaw::mean() const {
  switch (kind_) {
    case Kind::exponential:
      return 1.0 / a_;
    case Kind::gamma:
      return a_ / b_;
    case Kind::bernoulli:
      return a_;
    case Kind::uniform:
      return a_ / 2.0;
  }
  return 0.0;
}

std::optional<double> ScalarLaw::support_bound() const {
  switch (kind_) {
    case Kind::bernoulli:
      return 1.0;
    case Kind::uniform:
      return a_;
    default:
      return std::nullopt;
  }
}

std::optional<PowerEnvelope> ScalarLaw::envelope() const {
  switch (kind_) {
    case Kind::exponential:
      // rate/(rate + theta) <= rate/theta
      return PowerEnvelope{a_, 1.0};
    case Kind::gamma:
      return PowerEnvelope{std::pow(b_, a_), a_};
    case Kind::uniform:
      // (1 - e^{-theta b})/(theta b) <= 1/(theta b)
      return PowerEnvelope{1.0 / a_, 1.0};
    case Kind::bernoulli:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string ScalarLaw::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::exponential:
      out << "exponential(rate=" << a_ << ")";
      break;
    case Kind::gamma:
      out << "gamma(shape=" << a_ << ", rate=" << b_ << ")";
      break;
    case Kind::bernoulli:
      out << "bernoulli(p=" << a_ << ")";
      break;
    case Kind::uniform:
      out << "uniform(0, " << a_ << ")";
      break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// MatrixSource

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(std::size_t dim) {
  if (dim < 1) throw std::invalid_argument("matrix dimension must be >= 1");
}

ComplexMatrix complex_gaussian(std::size_t rows, std::size_t cols, RngStream& rng) {
  // Real and imaginary parts i.i.d. N(0, 1/2), so E g g* = I.
  const double s = std::sqrt(0.5);
  ComplexMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = rng.standard_normal();
      const double im = rng.standard_normal();
      g(i, j) = Complex(s * re, s * im);
    }
  }
  return g;
}

}  // namespace

MatrixSource MatrixSource::scaled_fixed(const HermitianMatrix& a, const ScalarLaw& law) {
  auto spectrum = std::make_shared<const SpectralDecomposition>(spectral_decompose(a));
  const double lmax = spectrum->eigenvalues(spectrum->eigenvalues.size() - 1);
  if (spectrum->eigenvalues(0) < -1e-10 * std::max(1.0, lmax)) {
    std::ostringstream msg;
    msg << "scaled_fixed requires a psd matrix; smallest eigenvalue is " << spectrum->eigenvalues(0);
    throw std::invalid_argument(msg.str());
  }
  return MatrixSource(ScaledFixed{a, law, std::move(spectrum)});
}

MatrixSource MatrixSource::bernoulli_diagonal(std::size_t dim, double p, double scale) {
  require_dim(dim);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli_diagonal p must lie in [0, 1]");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("bernoulli_diagonal scale must be > 0");
  return MatrixSource(BernoulliDiagonal{dim, p, scale});
}

MatrixSource MatrixSource::bounded_rank_one(std::size_t dim, double bound) {
  require_dim(dim);
  if (!(bound > 0.0) || !std::isfinite(bound)) throw std::invalid_argument("bounded_rank_one L must be > 0");
  return MatrixSource(BoundedRankOne{dim, bound});
}

MatrixSource MatrixSource::wishart(std::size_t dim, std::size_t degrees) {
  require_dim(dim);
  if (degrees < 1) throw std::invalid_argument("wishart degrees must be >= 1");
  return MatrixSource(Wishart{dim, degrees});
}

MatrixSource MatrixSource::block_doubled(const MatrixSource& inner) {
  return MatrixSource(BlockDoubled{std::make_shared<const MatrixSource>(inner)});
}

std::size_t MatrixSource::dim() const {
  return std::visit(Overloaded{
                        [](const ScaledFixed& s) { return s.matrix.dim(); },
                        [](const BernoulliDiagonal& s) { return s.dim; },
                        [](const BoundedRankOne& s) { return s.dim; },
                        [](const Wishart& s) { return s.dim; },
                        [](const BlockDoubled& s) { return 2 * s.inner->dim(); },
                    },
                    kind_);
}

std::string MatrixSource::kind_name() const {
  return std::visit(Overloaded{
                        [](const ScaledFixed&) { return std::string("scaled_fixed"); },
                        [](const BernoulliDiagonal&) { return std::string("bernoulli_diagonal"); },
                        [](const BoundedRankOne&) { return std::string("bounded_rank_one"); },
                        [](const Wishart&) { return std::string("wishart"); },
                        [](const BlockDoubled& s) { return "block_doubled(" + s.inner->kind_name() + ")"; },
                    },
                    kind_);
}

HermitianMatrix MatrixSource::sample(RngStream& rng) const {
  return std::visit(
      Overloaded{
          [&](const ScaledFixed& s) { return s.matrix * s.law.sample(rng); },
          [&](const BernoulliDiagonal& s) {
            const double b = rng.uniform() < s.p ? s.scale : 0.0;
            return HermitianMatrix::identity(s.dim) * b;
          },
          [&](const BoundedRankOne& s) {
            const double u = rng.uniform();
            ComplexMatrix w = complex_gaussian(s.dim, 1, rng);
            const double norm = w.norm();
            if (norm > 0.0) w /= norm;
            return HermitianMatrix(ComplexMatrix((s.bound * u) * (w * w.adjoint())));
          },
          [&](const Wishart& s) {
            const ComplexMatrix g = complex_gaussian(s.dim, s.degrees, rng);
            return HermitianMatrix(ComplexMatrix((g * g.adjoint()) / static_cast<double>(s.degrees)));
          },
          [&](const BlockDoubled& s) {
            const HermitianMatrix x = s.inner->sample(rng);
            return direct_sum(x, x);
          },
      },
      kind_);
}

std::optional<HermitianMatrix> MatrixSource::mean() const {
  return std::visit(
      Overloaded{
          [](const ScaledFixed& s) -> std::optional<HermitianMatrix> { return s.matrix * s.law.mean(); },
          [](const BernoulliDiagonal& s) -> std::optional<HermitianMatrix> {
            return HermitianMatrix::identity(s.dim) * (s.p * s.scale);
          },
          [](const BoundedRankOne& s) -> std::optional<HermitianMatrix> {
            // E u = 1/2 and E w w* = I/d.
            return HermitianMatrix::identity(s.dim) * (s.bound / (2.0 * static_cast<double>(s.dim)));
          },
          [](const Wishart& s) -> std::optional<HermitianMatrix> { return HermitianMatrix::identity(s.dim); },
          [](const BlockDoubled& s) -> std::optional<HermitianMatrix> {
            auto m = s.inner->mean();
            if (!m) return std::nullopt;
            return direct_sum(*m, *m);
          },
      },
      kind_);
}

std::optional<double> MatrixSource::uniform_bound() const {
  return std::visit(
      Overloaded{
          [](const ScaledFixed& s) -> std::optional<double> {
            const auto b = s.law.support_bound();
            if (!b) return std::nullopt;
            const auto& ev = s.spectrum->eigenvalues;
            return *b * std::max(0.0, ev(ev.size() - 1));
          },
          [](const BernoulliDiagonal& s) -> std::optional<double> { return s.scale; },
          [](const BoundedRankOne& s) -> std::optional<double> { return s.bound; },
          [](const Wishart&) -> std::optional<double> { return std::nullopt; },
          [](const BlockDoubled& s) -> std::optional<double> { return s.inner->uniform_bound(); },
      },
      kind_);
}

HermitianMatrix sample(const MatrixSource& source, RngStream& rng) { return source.sample(rng); }

// ---------------------------------------------------------------------------
// SumModel

SumModel::SumModel(std::vector<MatrixSource> sources) : sources_(std::move(sources)) {
  if (sources_.empty()) throw std::invalid_argument("a sum model needs at least one source");
  const std::size_t d = sources_.front().dim();
  for (std::size_t k = 1; k < sources_.size(); ++k) {
    if (sources_[k].dim() != d) {
      std::ostringstream msg;
      msg << "source " << k << " has dimension " << sources_[k].dim() << ", expected " << d;
      throw std::invalid_argument(msg.str());
    }
  }
}

SumModel SumModel::block_doubled() const {
  std::vector<MatrixSource> doubled;
  doubled.reserve(sources_.size());
  for (const auto& s : sources_) doubled.push_back(MatrixSource::block_doubled(s));
  return SumModel(std::move(doubled));
}

HermitianMatrix sample_sum(const SumModel& model, const RngStream& rng) {
  ComplexMatrix total = ComplexMatrix::Zero(model.dim(), model.dim());
  for (std::size_t k = 0; k < model.size(); ++k) {
    RngStream sub = rng.substream(k);
    total += model[k].sample(sub).entries();
  }
  return HermitianMatrix(total);
}

double sample_sum_lambda_max(const SumModel& model, const RngStream& rng) {
  return lambda_max(sample_sum(model, rng));
}

}  // namespace smalldev
