#include "smalldev/config.hpp"

#include "smalldev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace smalldev {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& why) { throw ConfigError(where + ": " + why); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing required key '") + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double number_at(const json& obj, const char* key, const std::string& where) {
  return number(require(obj, key, where), where + "." + key);
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), where + "." + key);
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<std::int64_t>();
}

std::string string_at(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

ScalarLaw parse_law(const json& j, const std::string& where) {
  const std::string kind = string_at(j, "kind", where);
  try {
    if (kind == "exponential") return ScalarLaw::exponential(number_at(j, "rate", where));
    if (kind == "gamma") return ScalarLaw::gamma(number_at(j, "shape", where), number_at(j, "rate", where));
    if (kind == "bernoulli") return ScalarLaw::bernoulli(number_at(j, "p", where));
    if (kind == "uniform") return ScalarLaw::uniform(number_at(j, "upper", where));
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    fail(where, e.what());
  }
  fail(where + ".kind", "unknown law '" + kind + "' (expected exponential, gamma, bernoulli or uniform)");
}

Eigen::MatrixXd parse_real_rows(const json& rows, std::size_t dim, const std::string& where) {
  if (!rows.is_array() || rows.size() != dim) fail(where, "expected " + std::to_string(dim) + " rows");
  Eigen::MatrixXd m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!rows[i].is_array() || rows[i].size() != dim) fail(where, "row " + std::to_string(i) + " has the wrong length");
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = number(rows[i][j], where);
  }
  return m;
}

HermitianMatrix parse_matrix(const json& j, std::size_t dim, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a matrix object");
  const double scale = number_or(j, "scale", 1.0, where);
  ComplexMatrix m;
  if (j.contains("diag")) {
    const json& d = j.at("diag");
    if (!d.is_array() || d.size() != dim) fail(where + ".diag", "expected " + std::to_string(dim) + " entries");
    m = ComplexMatrix::Zero(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = number(d[i], where + ".diag");
  } else if (j.contains("real")) {
    m = parse_real_rows(j.at("real"), dim, where + ".real").cast<Complex>();
    if (j.contains("imag")) {
      m += Complex(0.0, 1.0) * parse_real_rows(j.at("imag"), dim, where + ".imag").cast<Complex>();
    }
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) fail(where, "matrix is not Hermitian");
  } else if (j.value("identity", false)) {
    m = ComplexMatrix::Identity(dim, dim);
  } else {
    fail(where, "matrix needs one of 'identity', 'diag' or 'real'");
  }
  return HermitianMatrix(ComplexMatrix(m * scale));
}

MatrixSource parse_source(const json& j, std::size_t dim, const std::string& where) {
  const std::string kind = string_at(j, "kind", where);
  try {
    if (kind == "scaled_fixed") {
      return MatrixSource::scaled_fixed(parse_matrix(require(j, "matrix", where), dim, where + ".matrix"),
                                        parse_law(require(j, "law", where), where + ".law"));
    }
    if (kind == "bernoulli_diagonal") {
      return MatrixSource::bernoulli_diagonal(dim, number_at(j, "p", where), number_or(j, "scale", 1.0, where));
    }
    if (kind == "bounded_rank_one") return MatrixSource::bounded_rank_one(dim, number_at(j, "L", where));
    if (kind == "wishart") {
      const auto n = integer(require(j, "degrees", where), where + ".degrees");
      if (n < 1) fail(where + ".degrees", "must be >= 1");
      return MatrixSource::wishart(dim, static_cast<std::size_t>(n));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "unknown source kind '" + kind +
                            "' (expected scaled_fixed, bernoulli_diagonal, bounded_rank_one or wishart)");
}

std::vector<double> parse_eps_grid(const json& j) {
  const std::string where = "eps_grid";
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(number(v, where));
  } else if (j.is_object()) {
    const double start = number_at(j, "start", where);
    const double stop = number_at(j, "stop", where);
    const auto count = integer(require(j, "count", where), where + ".count");
    const std::string spacing = j.value("spacing", std::string("linear"));
    if (count < 1) fail(where + ".count", "must be >= 1");
    if (spacing != "linear" && spacing != "log") fail(where + ".spacing", "expected 'linear' or 'log'");
    if (spacing == "log" && !(start > 0.0 && stop > 0.0)) fail(where, "log spacing needs positive endpoints");
    for (std::int64_t i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      grid.push_back(spacing == "linear" ? start + t * (stop - start)
                                         : std::exp(std::log(start) + t * (std::log(stop) - std::log(start))));
    }
    if (count > 1) grid.back() = stop;
  } else {
    fail(where, "expected a list of epsilons or {start, stop, count, spacing}");
  }
  if (grid.empty()) fail(where, "epsilon grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) fail(where, "epsilons must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(where, "epsilons must be strictly ascending");
  }
  return grid;
}

BoundSpec parse_bound(const json& j, std::size_t index) {
  const std::string where = "bounds[" + std::to_string(index) + "]";
  BoundSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
  } else {
    spec.name = string_at(j, "name", where);
    spec.p = number_or(j, "p", 1.0, where);
    if (j.contains("Cp")) spec.cp = number(j.at("Cp"), where + ".Cp");
    if (j.contains("g")) {
      const json& g = j.at("g");
      GSpec gs;
      gs.kind = string_at(g, "kind", where + ".g");
      if (gs.kind == "exp_envelope") {
        gs.param = number_at(g, "L", where + ".g");
      } else if (gs.kind == "log_rate") {
        gs.param = number_at(g, "rate", where + ".g");
      } else {
        fail(where + ".g.kind", "unknown g built-in '" + gs.kind + "' (expected exp_envelope or log_rate)");
      }
      spec.g = gs;
    }
  }
  if (std::find(kBoundNames.begin(), kBoundNames.end(), spec.name) == kBoundNames.end()) {
    fail(where, "unknown bound '" + spec.name + "'");
  }
  if (spec.name == "negative_moment") {
    if (!(spec.p > 0.0)) fail(where + ".p", "must be > 0");
    if (spec.cp && !(*spec.cp > 0.0)) fail(where + ".Cp", "must be > 0");
  }
  if (spec.name == "g_theta" && !spec.g) fail(where, "g_theta needs a 'g' built-in");
  return spec;
}

}  // namespace

GThetaModel build_g_model(const GSpec& g, const SumModel& model) {
  if (g.kind == "exp_envelope") return make_exp_envelope(model, g.param);
  if (g.kind == "log_rate") return make_log_rate(model, g.param);
  throw ConfigError("unknown g built-in '" + g.kind + "'");
}

double resolved_cp(const BoundSpec& spec, const SumModel& model) {
  return spec.cp ? *spec.cp : admissible_cp(model, spec.p);
}

void check_applicable(const BoundSpec& spec, const SumModel& model, const MgfModel& mgf) {
  const auto reject = [&](const std::string& why) {
    throw ConfigError("bound '" + spec.name + "' is not applicable: " + why);
  };
  const auto& name = spec.name;
  try {
    if (name == "single" || name == "master" || name == "log_mean" || name == "product") {
      if (mgf.mode == MgfModel::Mode::analytic) {
        for (std::size_t k = 0; k < model.size(); ++k) {
          if (!has_analytic_mgf(model[k])) {
            reject("source " + std::to_string(k + 1) + " (" + model[k].kind_name() +
                   ") has no closed-form mgf; set mgf.mode to empirical");
          }
        }
      }
    } else if (name == "negative_moment") {
      resolved_cp(spec, model);
    } else if (name == "chernoff_sum" || name == "chernoff_product") {
      chernoff_sum_bound(model, 1.0);
    } else if (name == "series_sum" || name == "series_product") {
      series_sum_cutoff(model);
      series_product_cutoff(model);
    } else if (name == "g_theta") {
      build_g_model(*spec.g, model);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    reject(e.what());
  }
}

ExperimentConfig parse_config(const json& doc, const ConfigOverrides& ov) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object at the top level");
  ExperimentConfig cfg;
  cfg.experiment = doc.value("experiment", std::string("experiment"));

  // Ensemble.
  const json& ens = require(doc, "ensemble", "config");
  cfg.ensemble = ens;
  const auto dim = integer(require(ens, "dim", "ensemble"), "ensemble.dim");
  if (dim < 1) fail("ensemble.dim", "must be >= 1");
  const json& sources = require(ens, "sources", "ensemble");
  if (!sources.is_array() || sources.empty()) fail("ensemble.sources", "expected a non-empty list");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string where = "ensemble.sources[" + std::to_string(i) + "]";
    const auto repeat = sources[i].contains("repeat") ? integer(sources[i].at("repeat"), where + ".repeat") : 1;
    if (repeat < 1) fail(where + ".repeat", "must be >= 1");
    const MatrixSource src = parse_source(sources[i], static_cast<std::size_t>(dim), where);
    for (std::int64_t r = 0; r < repeat; ++r) cfg.sources.push_back(src);
  }

  // Simulation.
  if (doc.contains("simulation")) {
    const json& sim = doc.at("simulation");
    if (sim.contains("n")) {
      const auto n = integer(sim.at("n"), "simulation.n");
      if (n < 1) fail("simulation.n", "must be >= 1");
      cfg.simulation.n = static_cast<std::uint64_t>(n);
    }
    cfg.simulation.confidence = number_or(sim, "confidence", cfg.simulation.confidence, "simulation");
    if (sim.contains("seed")) {
      const auto s = integer(sim.at("seed"), "simulation.seed");
      if (s < 0) fail("simulation.seed", "must be >= 0");
      cfg.simulation.seed = static_cast<std::uint64_t>(s);
    }
  }
  if (ov.seed) cfg.simulation.seed = *ov.seed;
  if (ov.samples) {
    if (*ov.samples < 1) fail("--samples", "must be >= 1");
    cfg.simulation.n = static_cast<std::uint64_t>(*ov.samples);
  }
  if (ov.confidence) cfg.simulation.confidence = *ov.confidence;
  if (!(cfg.simulation.confidence > 0.0 && cfg.simulation.confidence < 1.0)) {
    fail("simulation.confidence", "must lie in (0, 1)");
  }

  // mgf.
  if (doc.contains("mgf")) {
    const json& m = doc.at("mgf");
    const std::string mode = m.value("mode", std::string("analytic"));
    if (mode == "empirical") {
      cfg.mgf.mode = MgfModel::Mode::empirical;
    } else if (mode != "analytic") {
      fail("mgf.mode", "expected 'analytic' or 'empirical'");
    }
    if (m.contains("samples")) {
      const auto n = integer(m.at("samples"), "mgf.samples");
      if (n < 1) fail("mgf.samples", "must be >= 1");
      cfg.mgf.samples = static_cast<std::size_t>(n);
    }
  }
  cfg.mgf.seed = cfg.simulation.seed;

  // Optimizer.
  if (doc.contains("optimizer")) {
    const json& o = doc.at("optimizer");
    cfg.optimizer.theta_min = number_or(o, "theta_min", cfg.optimizer.theta_min, "optimizer");
    cfg.optimizer.theta_max = number_or(o, "theta_max", cfg.optimizer.theta_max, "optimizer");
    if (o.contains("coarse_points")) cfg.optimizer.coarse_points = static_cast<int>(integer(o.at("coarse_points"), "optimizer.coarse_points"));
    cfg.optimizer.refine_tol = number_or(o, "refine_tol", cfg.optimizer.refine_tol, "optimizer");
    if (o.contains("max_refine_iters")) {
      cfg.optimizer.max_refine_iters = static_cast<int>(integer(o.at("max_refine_iters"), "optimizer.max_refine_iters"));
    }
  }
  if (ov.theta_min) cfg.optimizer.theta_min = *ov.theta_min;
  if (ov.theta_max) cfg.optimizer.theta_max = *ov.theta_max;
  if (ov.coarse_points) cfg.optimizer.coarse_points = *ov.coarse_points;
  try {
    cfg.optimizer.validate();
  } catch (const std::invalid_argument& e) {
    fail("optimizer", e.what());
  }

  // Grid and bounds.
  cfg.eps_grid = parse_eps_grid(require(doc, "eps_grid", "config"));
  const json& bounds = require(doc, "bounds", "config");
  if (!bounds.is_array() || bounds.empty()) fail("bounds", "expected a non-empty list");
  for (std::size_t i = 0; i < bounds.size(); ++i) cfg.bounds.push_back(parse_bound(bounds[i], i));

  // Output.
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (o.contains("csv_path")) cfg.output.csv_path = o.at("csv_path").get<std::string>();
    if (o.contains("json_path")) cfg.output.json_path = o.at("json_path").get<std::string>();
  }
  if (ov.csv_path) cfg.output.csv_path = *ov.csv_path;
  if (ov.json_path) cfg.output.json_path = *ov.json_path;

  const SumModel model = cfg.model();
  for (const auto& spec : cfg.bounds) check_applicable(spec, model, cfg.mgf);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, overrides);
}

json ExperimentConfig::resolved() const {
  const SumModel m = model();
  json out;
  out["experiment"] = experiment;
  out["ensemble"] = ensemble;
  out["ensemble"]["K"] = m.size();
  out["mgf"] = {{"mode", mgf.mode == MgfModel::Mode::analytic ? "analytic" : "empirical"},
                {"samples", mgf.samples},
                {"seed", mgf.seed}};
  json bounds_out = json::array();
  for (const auto& b : bounds) {
    json jb = {{"name", b.name}};
    if (b.name == "negative_moment") {
      jb["p"] = b.p;
      jb["Cp"] = resolved_cp(b, m);
    }
    if (b.g) {
      jb["g"] = {{"kind", b.g->kind}, {b.g->kind == "exp_envelope" ? "L" : "rate", b.g->param}};
    }
    bounds_out.push_back(jb);
  }
  out["bounds"] = bounds_out;
  out["eps_grid"] = eps_grid;
  out["simulation"] = {{"n", simulation.n}, {"confidence", simulation.confidence}, {"seed", simulation.seed}};
  out["optimizer"] = {{"theta_min", optimizer.theta_min},
                      {"theta_max", optimizer.theta_max},
                      {"coarse_points", optimizer.coarse_points},
                      {"refine_tol", optimizer.refine_tol},
                      {"max_refine_iters", optimizer.max_refine_iters}};
  return out;
}

}  // namespace smalldev
