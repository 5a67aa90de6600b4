#pragma once

#include "smalldev/ensembles.hpp"
#include "smalldev/mgf.hpp"
#include "smalldev/optimizer.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smalldev {

/**
 * Upper bound on P{lambda_max(sum_k X_k) <= epsilon}.
 *
 * `raw_value` is the bound expression itself; `value` is min(raw_value, 1),
 * forced to 1 when epsilon lies outside the bound's domain (`valid == false`).
 */
struct BoundResult {
  std::string name;
  double epsilon = 0.0;
  double raw_value = 1.0;
  double value = 1.0;
  std::optional<double> theta_star;
  bool valid = true;
  bool trivial = true;
  std::vector<std::pair<std::string, double>> details;

  /// Named parameter from `details`; throws std::out_of_range when absent.
  double detail(std::string_view key) const;
};

/// Applies the clamping rules and fills value/trivial.
BoundResult make_bound_result(std::string name, double epsilon, double raw_value, std::optional<double> theta_star,
                              bool valid, std::vector<std::pair<std::string, double>> details = {});

/**
 * E exp(-theta X_k) <= exp(g(theta) A_k) for all theta > 0, with g of one
 * sign. Supplied by the caller; see make_exp_envelope / make_log_rate.
 */
struct GThetaModel {
  enum class Sign { positive, negative };

  std::string label;
  std::function<double(double)> g;
  Sign sign;
  std::vector<HermitianMatrix> dominators;
};

/// g(theta) = (e^{-theta L} - 1)/L with A_k = E X_k; needs lambda_max(X_k) <= L.
GThetaModel make_exp_envelope(const SumModel& model, double L);

/// g(theta) = log(rate/(rate + theta)) with A_k = shape_k * I, for sources
/// x_k * I with x_k exponential(rate) or gamma(shape_k, rate).
GThetaModel make_log_rate(const SumModel& model, double rate);

/// inf_theta (1/d) e^{theta eps} E tr exp(-theta Y).
BoundResult single_matrix_bound(const SourceMgf& mgf, double epsilon, const OptimizerConfig& opt = {});

/// inf_theta e^{theta eps} exp(lambda_max(sum_k log E exp(-theta X_k))).
BoundResult master_bound(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt = {});
BoundResult master_bound(const SumModel& model, const MgfModel& mgf, double epsilon, const OptimizerConfig& opt = {});

/// inf_theta exp(theta eps + g(theta) eta) with eta = lambda_max or lambda_min of sum A_k.
BoundResult g_theta_bound(const GThetaModel& gmodel, double epsilon, const OptimizerConfig& opt = {});

/// inf_theta exp(theta eps + K log lambda_max((1/K) sum_k E exp(-theta X_k))).
BoundResult log_mean_bound(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt = {});

/// Product of per-source bounds on P{lambda_max(X_k) <= eps}; valid for psd sources.
BoundResult product_bound(std::span<const BoundResult> per_source);

/// Per-source single-matrix bounds combined by product_bound.
BoundResult product_of_single_bounds(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt = {});

/// The smallest per-source single-matrix bound, itself a bound on the sum.
BoundResult min_single_bound(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt = {});

/// Cp * eps^p.
BoundResult negative_moment_bound(double cp, double p, double epsilon);

/// lambda_max(sum_k E X_k)^{-p} * (1 + kCpHeadroom).
double admissible_cp(const SumModel& model, double p);
inline constexpr double kCpHeadroom = 1e-6;

/// (mu/eps)^{eps/L} exp((eps - mu)/L), mu = lambda_min(sum_k E X_k).
BoundResult chernoff_sum_bound(const SumModel& model, double epsilon);

/// prod_k (mu_k/eps)^{eps/L} exp((eps - mu_k)/L), mu_k = lambda_min(E X_k).
BoundResult chernoff_product_bound(const SumModel& model, double epsilon);

/// (e eps/(K alpha))^{alpha K} (C nu/K)^K, nu = lambda_max(sum_k A_k^{-alpha}).
BoundResult series_sum_bound(const SumModel& model, double epsilon);

/// (prod_k nu_k) C^K (e eps/alpha)^{K alpha}, nu_k = lambda_max(A_k^{-alpha}).
BoundResult series_product_bound(const SumModel& model, double epsilon);

/// Shared (C, alpha) envelope of a series model; throws UnsupportedEnsemble otherwise.
PowerEnvelope series_envelope(const SumModel& model);

/// Largest epsilon for which the series bounds are below one.
double series_sum_cutoff(const SumModel& model);
double series_product_cutoff(const SumModel& model);

}  // namespace smalldev
