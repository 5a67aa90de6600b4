#include "smalldev/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace smalldev {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double beta_quantile(double q, double a, double b) {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (incomplete_beta(mid, a, b) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Interval clopper_pearson(std::uint64_t hits, std::uint64_t n, double confidence) {
  if (n < 1 || hits > n) throw std::invalid_argument("clopper_pearson needs 0 <= hits <= n and n >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  const double tail = (1.0 - confidence) / 2.0;
  const auto k = static_cast<double>(hits);
  const auto m = static_cast<double>(n);
  const double low = hits == 0 ? 0.0 : beta_quantile(tail, k, m - k + 1.0);
  const double high = hits == n ? 1.0 : beta_quantile(1.0 - tail, k + 1.0, m - k);
  return {low, high};
}

std::vector<double> sample_lambda_max(const SumModel& model, std::uint64_t n, std::uint64_t seed, unsigned threads) {
  std::vector<double> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t j = begin; j < end; ++j) out[j] = sample_sum_lambda_max(model, RngStream(seed, j));
  };
  if (threads <= 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t begin = std::min<std::uint64_t>(n, t * chunk);
    const std::uint64_t end = std::min<std::uint64_t>(n, begin + chunk);
    pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
  return out;
}

std::vector<EmpiricalEstimate> estimate(const SumModel& model, std::span<const double> eps_grid,
                                        const EstimateOptions& options) {
  if (options.n < 1) throw std::invalid_argument("estimate needs n >= 1");
  if (eps_grid.empty()) throw std::invalid_argument("estimate needs a non-empty epsilon grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0) || (i > 0 && !(eps_grid[i] > eps_grid[i - 1]))) {
      throw std::invalid_argument("epsilon grid must be positive and strictly ascending");
    }
  }
  const auto draws = sample_lambda_max(model, options.n, options.seed, options.threads);

  // counts[i]: draws whose smallest admissible grid point is eps_grid[i].
  std::vector<std::uint64_t> counts(eps_grid.size(), 0);
  for (const double lmax : draws) {
    const auto it = std::lower_bound(eps_grid.begin(), eps_grid.end(), lmax);
    if (it != eps_grid.end()) ++counts[static_cast<std::size_t>(it - eps_grid.begin())];
  }
  std::vector<EmpiricalEstimate> out;
  out.reserve(eps_grid.size());
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    hits += counts[i];
    const Interval ci = clopper_pearson(hits, options.n, options.confidence);
    out.push_back({eps_grid[i], options.n, hits, static_cast<double>(hits) / static_cast<double>(options.n), ci.low,
                   ci.high, options.confidence});
  }
  return out;
}

DominationReport compare(const BoundTable& bounds, std::span<const EmpiricalEstimate> estimates) {
  DominationReport report;
  for (const auto& [name, results] : bounds) {
    if (results.size() != estimates.size()) {
      std::ostringstream msg;
      msg << "bound " << name << " has " << results.size() << " grid points, estimates have " << estimates.size();
      throw std::invalid_argument(msg.str());
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      const auto& e = estimates[i];
      if (r.epsilon != e.epsilon) {
        std::ostringstream msg;
        msg << "bound " << name << " evaluated at epsilon " << r.epsilon << " where the estimate grid has " << e.epsilon;
        throw std::invalid_argument(msg.str());
      }
      const bool dominated = r.value >= e.ci_low;
      report.rows.push_back({e.epsilon, name, r.value, e.p_hat, e.ci_low, e.ci_high, dominated});
      if (!dominated) ++report.violations;
    }
  }
  return report;
}

}  // namespace smalldev
