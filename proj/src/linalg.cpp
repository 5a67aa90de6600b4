#include "smalldev/linalg.hpp"

#include "smalldev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smalldev {

namespace {

ComplexMatrix symmetrize(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("HermitianMatrix requires a non-empty square matrix");
  }
  return (a + a.adjoint()) * 0.5;
}

}  // namespace

HermitianMatrix from_trusted(ComplexMatrix entries) {
  return HermitianMatrix(std::move(entries), HermitianMatrix::Trusted{});
}

HermitianMatrix::HermitianMatrix(const ComplexMatrix& entries) : entries_(symmetrize(entries)) {}

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXd& real_entries)
    : entries_(symmetrize(real_entries.cast<Complex>())) {}

HermitianMatrix HermitianMatrix::zero(std::size_t dim) {
  if (dim < 1) throw std::invalid_argument("HermitianMatrix dimension must be >= 1");
  return from_trusted(ComplexMatrix::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::identity(std::size_t dim) {
  if (dim < 1) throw std::invalid_argument("HermitianMatrix dimension must be >= 1");
  return from_trusted(ComplexMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("HermitianMatrix dimension must be >= 1");
  ComplexMatrix m = ComplexMatrix::Zero(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return from_trusted(std::move(m));
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  return from_trusted(entries_ + other.entries_);
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& other) const {
  return from_trusted(entries_ - other.entries_);
}

HermitianMatrix HermitianMatrix::operator-() const { return from_trusted(-entries_); }

HermitianMatrix HermitianMatrix::operator*(double s) const { return from_trusted(entries_ * s); }

HermitianMatrix SpectralDecomposition::reassemble(const RealVector& values) const {
  const ComplexMatrix scaled = eigenvectors * values.cast<Complex>().asDiagonal();
  return HermitianMatrix(ComplexMatrix(scaled * eigenvectors.adjoint()));
}

SpectralDecomposition spectral_decompose(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.entries(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    const double residual =
        (a.entries() * solver.eigenvectors() -
         solver.eigenvectors() * solver.eigenvalues().cast<Complex>().asDiagonal())
            .norm();
    throw ConvergenceError("Hermitian eigensolver did not converge", residual);
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealVector eigenvalues(const HermitianMatrix& a) {
  if (a.dim() == 1) return RealVector::Constant(1, a(0, 0).real());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.entries(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigensolver did not converge", std::nan(""));
  }
  return solver.eigenvalues();
}

HermitianMatrix matrix_function(const SpectralDecomposition& eig, const ScalarFunction& f) {
  RealVector mapped(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) {
    const double lambda = eig.eigenvalues(i);
    mapped(i) = f(lambda);
    if (!std::isfinite(mapped(i))) {
      std::ostringstream msg;
      msg << "matrix function undefined at eigenvalue " << lambda;
      throw DomainError(msg.str(), lambda);
    }
  }
  return eig.reassemble(mapped);
}

HermitianMatrix matrix_function(const HermitianMatrix& a, const ScalarFunction& f) {
  return matrix_function(spectral_decompose(a), f);
}

double pd_floor(double lambda_max) { return 1e-12 * std::max(1.0, lambda_max); }

namespace {

void require_pd(const SpectralDecomposition& eig, const char* op) {
  const double lmin = eig.eigenvalues(0);
  const double lmax = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (lmin <= pd_floor(lmax)) {
    std::ostringstream msg;
    msg << op << " requires a positive definite matrix; smallest eigenvalue is " << lmin;
    throw NotPositiveDefinite(msg.str(), lmin);
  }
}

}  // namespace

HermitianMatrix expm(const HermitianMatrix& a) {
  return matrix_function(a, [](double x) { return std::exp(x); });
}

HermitianMatrix logm(const HermitianMatrix& a) {
  const auto eig = spectral_decompose(a);
  require_pd(eig, "logm");
  return matrix_function(eig, [](double x) { return std::log(x); });
}

HermitianMatrix matrix_power(const HermitianMatrix& a, double s) {
  const auto eig = spectral_decompose(a);
  if (s < 0.0) {
    require_pd(eig, "negative matrix power");
  } else if (s != std::floor(s)) {
    // Fractional powers need a nonnegative spectrum; clip roundoff below zero.
    const double floor = -pd_floor(eig.eigenvalues(eig.eigenvalues.size() - 1));
    if (eig.eigenvalues(0) < floor) {
      std::ostringstream msg;
      msg << "fractional matrix power of a matrix with eigenvalue " << eig.eigenvalues(0);
      throw DomainError(msg.str(), eig.eigenvalues(0));
    }
    return matrix_function(eig, [s](double x) { return std::pow(std::max(x, 0.0), s); });
  }
  return matrix_function(eig, [s](double x) { return std::pow(x, s); });
}

double lambda_max(const HermitianMatrix& a) {
  const auto ev = eigenvalues(a);
  return ev(ev.size() - 1);
}

double lambda_min(const HermitianMatrix& a) { return eigenvalues(a)(0); }

double trace(const HermitianMatrix& a) { return a.entries().diagonal().real().sum(); }

bool is_psd(const HermitianMatrix& a, double tol) { return lambda_min(a) >= -tol; }

HermitianMatrix hermitian_dilation(const ComplexMatrix& b) {
  const auto p = b.rows();
  const auto q = b.cols();
  ComplexMatrix m = ComplexMatrix::Zero(p + q, p + q);
  m.topRightCorner(p, q) = b;
  m.bottomLeftCorner(q, p) = b.adjoint();
  return from_trusted(std::move(m));
}

HermitianMatrix direct_sum(const HermitianMatrix& a, const HermitianMatrix& b) {
  const auto p = static_cast<Eigen::Index>(a.dim());
  const auto q = static_cast<Eigen::Index>(b.dim());
  ComplexMatrix m = ComplexMatrix::Zero(p + q, p + q);
  m.topLeftCorner(p, p) = a.entries();
  m.bottomRightCorner(q, q) = b.entries();
  return from_trusted(std::move(m));
}

double frobenius_norm(const HermitianMatrix& a) { return a.entries().norm(); }

}  // namespace smalldev
