#include "smalldev/optimizer.hpp"

#include "smalldev/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace smalldev {

void OptimizerConfig::validate() const {
  if (!(theta_min > 0.0) || !std::isfinite(theta_max) || !(theta_min < theta_max)) {
    throw std::invalid_argument("optimizer requires 0 < theta_min < theta_max");
  }
  if (coarse_points < 3) throw std::invalid_argument("optimizer requires coarse_points >= 3");
  if (!(refine_tol > 0.0)) throw std::invalid_argument("optimizer refine_tol must be > 0");
  if (max_refine_iters < 0) throw std::invalid_argument("optimizer max_refine_iters must be >= 0");
}

MinimizeResult minimize(const std::function<double(double)>& f, const OptimizerConfig& cfg) {
  cfg.validate();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto eval = [&f](double theta) {
    const double v = f(theta);
    return std::isfinite(v) ? v : kInf;
  };

  const int n = cfg.coarse_points;
  const double lo = std::log(cfg.theta_min);
  const double hi = std::log(cfg.theta_max);
  const double step = (hi - lo) / (n - 1);
  auto grid_log_theta = [&](int i) { return i == n - 1 ? hi : lo + step * i; };

  int best = -1;
  double best_value = kInf;
  for (int i = 0; i < n; ++i) {
    const double v = eval(std::exp(grid_log_theta(i)));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best < 0) throw NoFiniteValue("objective is non-finite on the whole theta grid");

  double best_log_theta = grid_log_theta(best);
  const bool at_boundary = best == 0 || best == n - 1;

  // Golden-section search on log(theta) within the neighbouring grid cells.
  double a = grid_log_theta(best > 0 ? best - 1 : 0);
  double b = grid_log_theta(best < n - 1 ? best + 1 : n - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(std::exp(c));
  double fd = eval(std::exp(d));
  auto consider = [&](double x, double fx) {
    if (fx < best_value) {
      best_value = fx;
      best_log_theta = x;
    }
  };
  consider(c, fc);
  consider(d, fd);
  for (int iter = 0; iter < cfg.max_refine_iters && (b - a) > cfg.refine_tol; ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(std::exp(d));
    }
    consider(c, fc);
    consider(d, fd);
  }
  return {std::exp(best_log_theta), best_value, at_boundary};
}

}  // namespace smalldev
