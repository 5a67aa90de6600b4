#pragma once

#include <stdexcept>
#include <string>

namespace smalldev {

/// Base class for failures of a numerical routine (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigen-iteration did not converge; carries the residual norm.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A scalar function was undefined at an eigenvalue of its argument.
class DomainError : public NumericalError {
 public:
  DomainError(const std::string& what, double eigenvalue)
      : NumericalError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// logm or a negative power was asked of a matrix that is not pd.
class NotPositiveDefinite : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The objective was non-finite at every coarse grid point.
class NoFiniteValue : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A closed-form quantity was requested from a source that has none.
class Unavailable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bound's hypotheses are not met by the ensemble.
class UnsupportedEnsemble : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidDominators : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inapplicable experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace smalldev
