#include "smalldev/bounds.hpp"

#include "smalldev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace smalldev {

namespace {

using Details = std::vector<std::pair<std::string, double>>;

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    std::ostringstream msg;
    msg << "epsilon must be a positive finite number, got " << epsilon;
    throw std::invalid_argument(msg.str());
  }
}

std::string indexed(const char* stem, std::size_t k) { return std::string(stem) + "_" + std::to_string(k + 1); }

/// Minimizes theta*eps + exponent(theta); the bound is exp of the minimum.
BoundResult minimize_laplace(std::string name, double epsilon, const std::function<double(double)>& exponent,
                             const OptimizerConfig& opt, Details details) {
  require_epsilon(epsilon);
  std::optional<double> failed_theta;
  std::string failure;
  auto objective = [&](double theta) {
    try {
      return theta * epsilon + exponent(theta);
    } catch (const DomainError& e) {
      // Singular empirical mgf estimates at extreme theta: treated as +inf.
      if (!failed_theta) {
        failed_theta = theta;
        failure = e.what();
      }
      return std::numeric_limits<double>::infinity();
    }
  };
  MinimizeResult best;
  try {
    best = minimize(objective, opt);
  } catch (const NoFiniteValue&) {
    std::ostringstream msg;
    msg << name << " objective is non-finite for every theta";
    if (failed_theta) msg << " (first failure at theta=" << *failed_theta << ": " << failure << ")";
    throw NoFiniteValue(msg.str());
  }
  details.emplace_back("theta_star", best.theta_star);
  details.emplace_back("at_boundary", best.at_boundary ? 1.0 : 0.0);
  return make_bound_result(std::move(name), epsilon, std::exp(best.f_star), best.theta_star, true,
                           std::move(details));
}

HermitianMatrix sum_of(const std::vector<HermitianMatrix>& terms) {
  ComplexMatrix total = ComplexMatrix::Zero(terms.front().dim(), terms.front().dim());
  for (const auto& t : terms) total += t.entries();
  return HermitianMatrix(total);
}

std::string describe_source(const SumModel& model, std::size_t k) {
  return "source " + std::to_string(k + 1) + " (" + model[k].kind_name() + ")";
}

std::vector<HermitianMatrix> means_of(const SumModel& model, const char* bound) {
  std::vector<HermitianMatrix> means;
  for (std::size_t k = 0; k < model.size(); ++k) {
    auto m = model[k].mean();
    if (!m) throw UnsupportedEnsemble(std::string(bound) + ": " + describe_source(model, k) + " has no closed-form mean");
    means.push_back(std::move(*m));
  }
  return means;
}

double uniform_bound_of(const SumModel& model, const char* bound) {
  double L = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const auto b = model[k].uniform_bound();
    if (!b) {
      throw UnsupportedEnsemble(std::string(bound) + ": " + describe_source(model, k) +
                                " has no almost-sure bound on lambda_max");
    }
    L = std::max(L, *b);
  }
  return L;
}

/// log of (mu/eps)^{eps/L} exp((eps - mu)/L), the Chernoff factor at theta = log(mu/eps)/L.
double log_chernoff_factor(double mu, double epsilon, double L) {
  return (epsilon / L) * std::log(mu / epsilon) + (epsilon - mu) / L;
}

const ScaledFixed& series_term(const SumModel& model, std::size_t k) {
  const auto* s = std::get_if<ScaledFixed>(&model[k].variant());
  if (s == nullptr) {
    throw UnsupportedEnsemble("series bounds require scaled_fixed sources; " + describe_source(model, k) +
                              " is not");
  }
  return *s;
}

/// lambda_max(A^{-alpha}) = lambda_min(A)^{-alpha}, with the pd check of matrix_power.
double inverse_power_top(const HermitianMatrix& a, double alpha) { return lambda_max(matrix_power(a, -alpha)); }

}  // namespace

double BoundResult::detail(std::string_view key) const {
  for (const auto& [k, v] : details) {
    if (k == key) return v;
  }
  throw std::out_of_range("bound " + name + " has no detail '" + std::string(key) + "'");
}

BoundResult make_bound_result(std::string name, double epsilon, double raw_value, std::optional<double> theta_star,
                              bool valid, Details details) {
  BoundResult r;
  r.name = std::move(name);
  r.epsilon = epsilon;
  r.raw_value = std::isnan(raw_value) ? 1.0 : std::max(raw_value, 0.0);
  r.valid = valid;
  r.value = valid ? std::min(r.raw_value, 1.0) : 1.0;
  r.trivial = r.value == 1.0;
  r.theta_star = theta_star;
  r.details = std::move(details);
  return r;
}

// ---------------------------------------------------------------------------
// g(theta) models

GThetaModel make_exp_envelope(const SumModel& model, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("exp_envelope needs L > 0");
  const double actual = uniform_bound_of(model, "exp_envelope");
  if (actual > L * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "exp_envelope(L=" << L << ") requires lambda_max(X_k) <= L, but a source is bounded only by " << actual;
    throw InvalidDominators(msg.str());
  }
  GThetaModel g;
  std::ostringstream label;
  label << "exp_envelope(L=" << L << ")";
  g.label = label.str();
  g.g = [L](double theta) { return std::expm1(-theta * L) / L; };
  g.sign = GThetaModel::Sign::negative;
  g.dominators = means_of(model, "exp_envelope");
  return g;
}

GThetaModel make_log_rate(const SumModel& model, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("log_rate needs rate > 0");
  GThetaModel g;
  std::ostringstream label;
  label << "log_rate(rate=" << rate << ")";
  g.label = label.str();
  g.g = [rate](double theta) { return -std::log1p(theta / rate); };
  g.sign = GThetaModel::Sign::negative;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const auto* s = std::get_if<ScaledFixed>(&model[k].variant());
    const auto fail = [&](const std::string& why) {
      return InvalidDominators("log_rate: " + describe_source(model, k) + " " + why);
    };
    if (s == nullptr) throw fail("is not scaled_fixed");
    const auto id = HermitianMatrix::identity(model.dim());
    if ((s->matrix - id).entries().cwiseAbs().maxCoeff() > 1e-12) throw fail("does not use the identity matrix");
    double shape = 0.0;
    if (s->law.kind() == ScalarLaw::Kind::exponential && s->law.param1() == rate) {
      shape = 1.0;
    } else if (s->law.kind() == ScalarLaw::Kind::gamma && s->law.param2() == rate) {
      shape = s->law.param1();
    } else {
      throw fail("is not exponential/gamma with the requested rate");
    }
    g.dominators.push_back(id * shape);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Laplace-transform bounds

BoundResult single_matrix_bound(const SourceMgf& mgf, double epsilon, const OptimizerConfig& opt) {
  return minimize_laplace(
      "single", epsilon, [&mgf](double theta) { return mgf.log_mean_trace(theta); }, opt,
      {{"d", static_cast<double>(mgf.dim())}});
}

BoundResult master_bound(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt) {
  return minimize_laplace(
      "master", epsilon, [&mgf](double theta) { return mgf.master_exponent(theta); }, opt,
      {{"K", static_cast<double>(mgf.size())}});
}

BoundResult master_bound(const SumModel& model, const MgfModel& mgf, double epsilon, const OptimizerConfig& opt) {
  const MgfSnapshot snapshot(model, mgf);
  return master_bound(snapshot, epsilon, opt);
}

BoundResult g_theta_bound(const GThetaModel& gmodel, double epsilon, const OptimizerConfig& opt) {
  require_epsilon(epsilon);
  if (gmodel.dominators.empty()) throw InvalidDominators("g_theta needs at least one dominator");
  opt.validate();
  const bool positive = gmodel.sign == GThetaModel::Sign::positive;
  const double lo = std::log(opt.theta_min);
  const double step = (std::log(opt.theta_max) - lo) / (opt.coarse_points - 1);
  for (int i = 0; i < opt.coarse_points; ++i) {
    const double theta = std::exp(lo + step * i);
    const double g = gmodel.g(theta);
    if (positive ? !(g > 0.0) : !(g < 0.0)) {
      std::ostringstream msg;
      msg << gmodel.label << " declared " << (positive ? "positive" : "negative") << " but g(" << theta << ") = " << g;
      throw InvalidDominators(msg.str());
    }
  }
  const HermitianMatrix total = sum_of(gmodel.dominators);
  const double eta = positive ? lambda_max(total) : lambda_min(total);
  const auto& g = gmodel.g;
  return minimize_laplace(
      "g_theta", epsilon, [&g, eta](double theta) { return g(theta) * eta; }, opt,
      {{positive ? "eta1" : "eta2", eta}, {"K", static_cast<double>(gmodel.dominators.size())}});
}

BoundResult log_mean_bound(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt) {
  return minimize_laplace(
      "log_mean", epsilon, [&mgf](double theta) { return mgf.log_mean_exponent(theta); }, opt,
      {{"K", static_cast<double>(mgf.size())}});
}

// ---------------------------------------------------------------------------
// Reductions to a single matrix

BoundResult product_bound(std::span<const BoundResult> per_source) {
  if (per_source.empty()) throw std::invalid_argument("product_bound needs at least one per-source bound");
  double product = 1.0;
  double smallest = 1.0;
  std::size_t argmin = 0;
  for (std::size_t k = 0; k < per_source.size(); ++k) {
    const double v = per_source[k].value;
    product *= v;
    if (v < smallest) {
      smallest = v;
      argmin = k;
    }
  }
  Details details{{"K", static_cast<double>(per_source.size())},
                  {"min_single", smallest},
                  {"argmin", static_cast<double>(argmin + 1)}};
  return make_bound_result("product", per_source.front().epsilon, product, std::nullopt, true, std::move(details));
}

namespace {

std::vector<BoundResult> per_source_single(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt) {
  std::vector<BoundResult> out;
  out.reserve(mgf.size());
  for (std::size_t k = 0; k < mgf.size(); ++k) out.push_back(single_matrix_bound(mgf[k], epsilon, opt));
  return out;
}

}  // namespace

BoundResult product_of_single_bounds(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt) {
  const auto singles = per_source_single(mgf, epsilon, opt);
  return product_bound(singles);
}

BoundResult min_single_bound(const MgfSnapshot& mgf, double epsilon, const OptimizerConfig& opt) {
  const auto singles = per_source_single(mgf, epsilon, opt);
  const auto best = std::min_element(singles.begin(), singles.end(),
                                     [](const BoundResult& a, const BoundResult& b) { return a.value < b.value; });
  BoundResult r = *best;
  r.details.emplace_back("source", static_cast<double>(best - singles.begin() + 1));
  return r;
}

// ---------------------------------------------------------------------------
// Negative moment

BoundResult negative_moment_bound(double cp, double p, double epsilon) {
  require_epsilon(epsilon);
  if (!(cp > 0.0) || !std::isfinite(cp)) throw std::invalid_argument("negative_moment needs Cp > 0");
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("negative_moment needs p > 0");
  return make_bound_result("negative_moment", epsilon, cp * std::pow(epsilon, p), std::nullopt, true,
                           {{"Cp", cp}, {"p", p}});
}

double admissible_cp(const SumModel& model, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("admissible_Cp needs p > 0");
  const double top = lambda_max(sum_of(means_of(model, "negative_moment")));
  if (!(top > 0.0)) throw DegenerateModel("negative_moment: lambda_max(sum_k E X_k) is zero");
  return std::pow(top, -p) * (1.0 + kCpHeadroom);
}

// ---------------------------------------------------------------------------
// Bounded eigenvalues

BoundResult chernoff_sum_bound(const SumModel& model, double epsilon) {
  require_epsilon(epsilon);
  const double L = uniform_bound_of(model, "chernoff_sum");
  const double mu = std::max(0.0, lambda_min(sum_of(means_of(model, "chernoff_sum"))));
  Details details{{"L", L}, {"mu", mu}, {"K", static_cast<double>(model.size())}};
  if (!(mu > 0.0) || !(epsilon < mu)) {
    // theta* = log(mu/eps)/L <= 0: the infimum over theta > 0 is the theta -> 0 limit, 1.
    return make_bound_result("chernoff_sum", epsilon, 1.0, std::nullopt, false, std::move(details));
  }
  const double theta = std::log(mu / epsilon) / L;
  details.emplace_back("theta_star", theta);
  return make_bound_result("chernoff_sum", epsilon, std::exp(log_chernoff_factor(mu, epsilon, L)), theta, true,
                           std::move(details));
}

BoundResult chernoff_product_bound(const SumModel& model, double epsilon) {
  require_epsilon(epsilon);
  const double L = uniform_bound_of(model, "chernoff_product");
  const auto means = means_of(model, "chernoff_product");
  Details details{{"L", L}, {"K", static_cast<double>(model.size())}};
  double log_total = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < means.size(); ++k) {
    const auto ev = eigenvalues(means[k]);
    double mu = ev(0);
    if (mu <= pd_floor(ev(ev.size() - 1))) mu = 0.0;
    details.emplace_back(indexed("mu", k), mu);
    // A vanishing mu_k makes that factor vacuous; it contributes 1.
    if (mu > 0.0) {
      smallest = std::min(smallest, mu);
      log_total += log_chernoff_factor(mu, epsilon, L);
    }
  }
  const bool valid = std::isfinite(smallest) && epsilon < smallest;
  return make_bound_result("chernoff_product", epsilon, valid ? std::exp(log_total) : 1.0, std::nullopt, valid,
                           std::move(details));
}

// ---------------------------------------------------------------------------
// Matrix series

PowerEnvelope series_envelope(const SumModel& model) {
  std::optional<PowerEnvelope> shared;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const auto& term = series_term(model, k);
    const auto env = term.law.envelope();
    if (!env) {
      throw UnsupportedEnsemble("series bounds: " + describe_source(model, k) + " law " + term.law.describe() +
                                " has no power envelope");
    }
    if (!shared) {
      shared = env;
    } else if (std::abs(env->C - shared->C) > 1e-12 * shared->C ||
               std::abs(env->alpha - shared->alpha) > 1e-12 * shared->alpha) {
      throw UnsupportedEnsemble("series bounds need one (C, alpha) envelope for every source; " +
                                describe_source(model, k) + " differs");
    }
  }
  return *shared;
}

namespace {

struct SeriesSumParams {
  PowerEnvelope env;
  double nu;
  double K;
};

SeriesSumParams series_sum_params(const SumModel& model) {
  const PowerEnvelope env = series_envelope(model);
  std::vector<HermitianMatrix> powers;
  for (std::size_t k = 0; k < model.size(); ++k) powers.push_back(matrix_power(series_term(model, k).matrix, -env.alpha));
  return {env, lambda_max(sum_of(powers)), static_cast<double>(model.size())};
}

struct SeriesProductParams {
  PowerEnvelope env;
  std::vector<double> nus;
  double log_nu_sum;
};

SeriesProductParams series_product_params(const SumModel& model) {
  SeriesProductParams p{series_envelope(model), {}, 0.0};
  for (std::size_t k = 0; k < model.size(); ++k) {
    p.nus.push_back(inverse_power_top(series_term(model, k).matrix, p.env.alpha));
    p.log_nu_sum += std::log(p.nus.back());
  }
  return p;
}

double sum_cutoff(const SeriesSumParams& s) {
  const double a = s.env.alpha;
  return (s.K * a / std::numbers::e) * std::pow(s.K / (s.env.C * s.nu), 1.0 / a);
}

double product_cutoff(const SeriesProductParams& p) {
  const double a = p.env.alpha;
  const double K = static_cast<double>(p.nus.size());
  return (a / std::numbers::e) * std::pow(p.env.C, -1.0 / a) * std::exp(-p.log_nu_sum / (a * K));
}

}  // namespace

double series_sum_cutoff(const SumModel& model) { return sum_cutoff(series_sum_params(model)); }

double series_product_cutoff(const SumModel& model) { return product_cutoff(series_product_params(model)); }

BoundResult series_sum_bound(const SumModel& model, double epsilon) {
  require_epsilon(epsilon);
  const auto s = series_sum_params(model);
  const double a = s.env.alpha;
  const double K = s.K;
  const double theta = a * K / epsilon;
  const double log_raw = a * K * (1.0 + std::log(epsilon) - std::log(K * a)) + K * std::log(s.env.C * s.nu / K);
  const double cutoff = sum_cutoff(s);
  return make_bound_result("series_sum", epsilon, std::exp(log_raw), theta, epsilon < cutoff,
                           {{"C", s.env.C},
                            {"alpha", a},
                            {"nu", s.nu},
                            {"K", K},
                            {"theta_star", theta},
                            {"cutoff", cutoff}});
}

BoundResult series_product_bound(const SumModel& model, double epsilon) {
  require_epsilon(epsilon);
  const auto p = series_product_params(model);
  const double a = p.env.alpha;
  const double K = static_cast<double>(p.nus.size());
  const double log_raw = p.log_nu_sum + K * std::log(p.env.C) + K * a * (1.0 + std::log(epsilon) - std::log(a));
  const double cutoff = product_cutoff(p);
  const double theta = a / epsilon;
  Details details{{"C", p.env.C}, {"alpha", a}, {"K", K}};
  for (std::size_t k = 0; k < p.nus.size(); ++k) details.emplace_back(indexed("nu", k), p.nus[k]);
  details.emplace_back("theta_star", theta);
  details.emplace_back("cutoff", cutoff);
  return make_bound_result("series_product", epsilon, std::exp(log_raw), theta, epsilon < cutoff, std::move(details));
}

}  // namespace smalldev
