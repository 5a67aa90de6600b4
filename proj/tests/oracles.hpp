#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the library routine it is used to check.

#include "smalldev/linalg.hpp"
#include "smalldev/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

namespace oracle {

inline smalldev::ComplexMatrix random_complex(std::size_t rows, std::size_t cols, smalldev::RngStream& rng) {
  smalldev::ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = {rng.standard_normal(), rng.standard_normal()};
  }
  return m;
}

inline smalldev::HermitianMatrix random_hermitian(std::size_t d, smalldev::RngStream& rng) {
  const auto g = random_complex(d, d, rng);
  return smalldev::HermitianMatrix(smalldev::ComplexMatrix((g + g.adjoint()) * 0.5));
}

/// G G*/d + shift I, positive definite.
inline smalldev::HermitianMatrix random_pd(std::size_t d, smalldev::RngStream& rng, double shift = 0.1) {
  const auto g = random_complex(d, d, rng);
  smalldev::ComplexMatrix m = g * g.adjoint() / static_cast<double>(d);
  m += shift * smalldev::ComplexMatrix::Identity(d, d);
  return smalldev::HermitianMatrix(m);
}

inline double relative_frobenius(const smalldev::ComplexMatrix& a, const smalldev::ComplexMatrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// P{Binomial(n, p) = k}.
inline double binomial_pmf(int k, int n, double p) {
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// P{Binomial(n, p) <= k} by direct summation in long double.
inline double binomial_cdf(int k, int n, double p) {
  long double total = 0.0L;
  for (int i = 0; i <= k; ++i) total += binomial_pmf(i, n, p);
  return static_cast<double>(std::min<long double>(total, 1.0L));
}

/// Clopper-Pearson endpoints by bisection on the exact binomial tails:
/// low solves P{Bin >= hits} = tail, high solves P{Bin <= hits} = tail.
inline std::pair<double, double> clopper_pearson_bruteforce(int hits, int n, double confidence) {
  const double tail = (1.0 - confidence) / 2.0;
  auto solve = [&](const std::function<double(double)>& increasing, double target) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (increasing(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double low = hits == 0 ? 0.0 : solve([&](double p) { return 1.0 - binomial_cdf(hits - 1, n, p); }, tail);
  const double high = hits == n ? 1.0 : solve([&](double p) { return 1.0 - binomial_cdf(hits, n, p); }, 1.0 - tail);
  return {low, high};
}

/// Gamma(k, 1) CDF for integer shape k: 1 - e^{-x} sum_{i<k} x^i/i!.
inline double gamma_int_cdf(int k, double x) {
  long double term = 1.0L, sum = 0.0L;
  for (int i = 0; i < k; ++i) {
    sum += term;
    term *= static_cast<long double>(x) / (i + 1);
  }
  return static_cast<double>(1.0L - std::exp(static_cast<long double>(-x)) * sum);
}

/// Minimum of f over a dense log grid in [lo, hi], refined by repeated zooming.
inline std::pair<double, double> dense_grid_min(const std::function<double(double)>& f, double lo, double hi,
                                                int points = 20001, int zooms = 6) {
  double a = std::log(lo), b = std::log(hi);
  double best_x = lo, best_f = std::numeric_limits<double>::infinity();
  for (int z = 0; z < zooms; ++z) {
    const double step = (b - a) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double x = std::exp(a + step * i);
      const double v = f(x);
      if (v < best_f) {
        best_f = v;
        best_x = x;
      }
    }
    a = std::log(best_x) - 2 * step;
    b = std::log(best_x) + 2 * step;
  }
  return {best_x, best_f};
}

}  // namespace oracle
