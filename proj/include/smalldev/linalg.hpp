#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace smalldev {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/**
 * Dense d x d complex Hermitian matrix.
 *
 * The constructor replaces its input by (A + A*)/2, so values built from
 * accumulated sums stay exactly Hermitian. Immutable after construction.
 */
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const ComplexMatrix& entries);
  explicit HermitianMatrix(const Eigen::MatrixXd& real_entries);

  static HermitianMatrix zero(std::size_t dim);
  static HermitianMatrix identity(std::size_t dim);
  static HermitianMatrix diagonal(std::span<const double> values);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const ComplexMatrix& entries() const noexcept { return entries_; }
  Complex operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-(const HermitianMatrix& other) const;
  HermitianMatrix operator-() const;
  HermitianMatrix operator*(double s) const;

 private:
  struct Trusted {};
  HermitianMatrix(ComplexMatrix entries, Trusted) : entries_(std::move(entries)) {}

  ComplexMatrix entries_;

  friend HermitianMatrix from_trusted(ComplexMatrix entries);
};

inline HermitianMatrix operator*(double s, const HermitianMatrix& a) { return a * s; }

/// Eigenvalues ascending; eigenvectors are the columns of a unitary matrix.
struct SpectralDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  /// U diag(values) U*.
  HermitianMatrix reassemble(const RealVector& values) const;
  HermitianMatrix reassemble() const { return reassemble(eigenvalues); }
};

SpectralDecomposition spectral_decompose(const HermitianMatrix& a);

/// Ascending eigenvalues without eigenvectors.
RealVector eigenvalues(const HermitianMatrix& a);

using ScalarFunction = std::function<double(double)>;

/// U f(Lambda) U*. Throws DomainError if f is not finite at some eigenvalue.
HermitianMatrix matrix_function(const HermitianMatrix& a, const ScalarFunction& f);
HermitianMatrix matrix_function(const SpectralDecomposition& eig, const ScalarFunction& f);

/// Eigenvalues at or below this are treated as non-positive by logm and
/// negative powers.
double pd_floor(double lambda_max);

HermitianMatrix expm(const HermitianMatrix& a);
HermitianMatrix logm(const HermitianMatrix& a);
HermitianMatrix matrix_power(const HermitianMatrix& a, double s);

double lambda_max(const HermitianMatrix& a);
double lambda_min(const HermitianMatrix& a);
double trace(const HermitianMatrix& a);
bool is_psd(const HermitianMatrix& a, double tol = 1e-10);

/// [[0, B], [B*, 0]]; its largest eigenvalue is the top singular value of B.
HermitianMatrix hermitian_dilation(const ComplexMatrix& b);

/// Block-diagonal [[A, 0], [0, B]].
HermitianMatrix direct_sum(const HermitianMatrix& a, const HermitianMatrix& b);

double frobenius_norm(const HermitianMatrix& a);

}  // namespace smalldev
