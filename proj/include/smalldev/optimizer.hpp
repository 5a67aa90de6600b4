#pragma once

#include <functional>

namespace smalldev {

struct OptimizerConfig {
  double theta_min = 1e-6;
  double theta_max = 1e6;
  int coarse_points = 200;
  /// Relative tolerance on theta for the golden-section stage.
  double refine_tol = 1e-8;
  int max_refine_iters = 200;

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct MinimizeResult {
  double theta_star;
  double f_star;
  /// The coarse minimum sat on theta_min or theta_max.
  bool at_boundary;
};

/**
 * Minimizes f over [theta_min, theta_max].
 *
 * Scans a log-spaced coarse grid, then refines with golden-section search
 * (in log theta) inside the cell bracketing the best grid point. Non-finite
 * values count as +inf. Throws NoFiniteValue if f is never finite on the grid.
 */
MinimizeResult minimize(const std::function<double(double)>& f, const OptimizerConfig& cfg = {});

}  // namespace smalldev
