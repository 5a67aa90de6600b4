#include <doctest.h>

#include "process.hpp"
#include "smalldev/cli.hpp"
#include "smalldev/config.hpp"
#include "smalldev/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace smalldev;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

json demo(const std::string& name) {
  std::ifstream in(proc::config_path(name));
  return json::parse(in, nullptr, true, true);
}

std::string write_config(const json& doc, const std::string& name) {
  static const auto dir = proc::scratch_dir("cfg");
  const auto path = dir / (name + ".json");
  std::ofstream(path) << doc.dump(2);
  return path.string();
}

}  // namespace

TEST_CASE("bound on the Bernoulli demo: CSV schema") {
  const auto r = proc::run_cli("bound --config " + proc::config_path("bernoulli-diagonal"));
  REQUIRE(r.exit_code == 0);
  const auto ls = lines(r.out);
  REQUIRE(!ls.empty());
  CHECK(ls[0] == "epsilon,bound,value,raw_value,theta_star,valid");
  const auto cfg = load_config(proc::config_path("bernoulli-diagonal"));
  CHECK(ls.size() == 1 + 10 * cfg.bounds.size());
  std::map<std::string, int> per_bound;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    REQUIRE(f.size() == 6);
    ++per_bound[f[1]];
    const double value = std::stod(f[2]);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
  }
  for (const auto& [name, count] : per_bound) CHECK_MESSAGE(count == 10, name);
}

TEST_CASE("numbers are printed with 17 significant digits") {
  CHECK(cli::format_number(0.1) == "0.10000000000000001");
  CHECK(cli::format_number(1.0) == "1");
  CHECK(std::stod(cli::format_number(std::exp(-4.5))) == std::exp(-4.5));
}

TEST_CASE("config validation exits with 2") {
  SUBCASE("series bound on a wishart ensemble") {
    auto doc = demo("wishart-empirical-mgf");
    doc["bounds"] = json::array({"series_sum"});
    const auto r = proc::run_cli("bound --config " + write_config(doc, "wishart-series"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("series bounds require scaled_fixed sources") != std::string::npos);
  }
  SUBCASE("empty eps grid") {
    auto doc = demo("bernoulli-diagonal");
    doc["eps_grid"] = json::array();
    CHECK(proc::run_cli("bound --config " + write_config(doc, "empty-grid")).exit_code == 2);
  }
  SUBCASE("n = 0") {
    CHECK(proc::run_cli("simulate --samples 0 --config " + proc::config_path("bernoulli-diagonal")).exit_code == 2);
    auto doc = demo("bernoulli-diagonal");
    doc["simulation"]["n"] = 0;
    CHECK(proc::run_cli("simulate --config " + write_config(doc, "n0")).exit_code == 2);
  }
  SUBCASE("malformed inputs") {
    CHECK(proc::run_cli("bound --config /nonexistent/file.json").exit_code == 2);
    const auto dir = proc::scratch_dir("cfg");
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(proc::run_cli("bound --config " + (dir / "broken.json").string()).exit_code == 2);
    auto doc = demo("bernoulli-diagonal");
    doc["bounds"] = json::array({"nonsense"});
    CHECK(proc::run_cli("bound --config " + write_config(doc, "unknown-bound")).exit_code == 2);
    doc = demo("bernoulli-diagonal");
    doc["eps_grid"] = json::array({0.3, 0.2});
    CHECK(proc::run_cli("bound --config " + write_config(doc, "descending")).exit_code == 2);
    CHECK(proc::run_cli("bound").exit_code == 2);
    CHECK(proc::run_cli("frobnicate").exit_code == 2);
  }
  SUBCASE("analytic mgf requested for a source without one") {
    auto doc = demo("wishart-empirical-mgf");
    doc["mgf"]["mode"] = "analytic";
    const auto r = proc::run_cli("bound --config " + write_config(doc, "wishart-analytic"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("bound 'single'") != std::string::npos);
    CHECK(r.err.find("wishart") != std::string::npos);
  }
}

TEST_CASE("numerical failure exits with 3") {
  auto doc = demo("bernoulli-diagonal");
  doc["bounds"] = json::array({"master"});
  doc["eps_grid"] = json::array({1e10});
  const auto r =
      proc::run_cli("bound --theta-min 1e299 --theta-max 1e300 --config " + write_config(doc, "overflow"));
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("non-finite") != std::string::npos);
}

TEST_CASE("simulate: deterministic and consistent with the binomial truth") {
  const auto path = proc::config_path("bernoulli-diagonal");
  const auto a = proc::run_cli("simulate --seed 42 --config " + path);
  const auto b = proc::run_cli("simulate --seed 42 --config " + path);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const auto c = proc::run_cli("simulate --seed 43 --config " + path);
  CHECK(a.out != c.out);
  const auto ls = lines(a.out);
  CHECK(ls[0] == "epsilon,n,hits,p_hat,ci_low,ci_high");
  // every grid point lies below 1, where the probability is 2^-10
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    CHECK(std::stod(f[4]) <= std::pow(2.0, -10));
    CHECK(std::stod(f[5]) >= std::pow(2.0, -10));
  }

  auto doc = demo("bernoulli-diagonal");
  doc["eps_grid"] = json::array({0.5});
  const auto half = lines(proc::run_cli("simulate --seed 42 --config " + write_config(doc, "half")).out);
  REQUIRE(half.size() == 2);
  const auto f = fields(half[1]);
  CHECK(f[0] == "0.5");
  CHECK(f[1] == "100000");
  CHECK(std::stod(f[4]) <= std::pow(2.0, -10));
  CHECK(std::stod(f[5]) >= std::pow(2.0, -10));
}

TEST_CASE("compare: report schema, stdout default and forced violations") {
  auto doc = demo("bernoulli-diagonal");
  doc["simulation"]["n"] = 20000;
  const auto path = write_config(doc, "small-compare");
  const auto r = proc::run_cli("compare --config " + path);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  std::vector<std::string> keys;
  for (const auto& [k, v] : report.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"config_echo", "experiment", "rows", "violations"});
  CHECK(report["experiment"] == "bernoulli-diagonal");
  CHECK(report["violations"] == 0);
  CHECK(report["rows"].size() == 80);
  CHECK(report["config_echo"]["simulation"]["n"] == 20000);
  CHECK(report["config_echo"]["eps_grid"].size() == 10);

  const auto forced = proc::run_cli("compare --scale-bounds 0.0 --config " + path);
  CHECK(forced.exit_code == 1);
  CHECK(json::parse(forced.out)["violations"].get<int>() > 0);

  const auto dir = proc::scratch_dir("out");
  const auto csv = (dir / "r.csv").string();
  const auto js = (dir / "r.json").string();
  const auto w = proc::run_cli("compare --config " + path + " --csv " + csv + " --json " + js);
  CHECK(w.exit_code == 0);
  CHECK(w.out.empty());
  CHECK(lines(proc::slurp(csv))[0] == "epsilon,bound,bound_value,p_hat,ci_low,ci_high,dominated");
  CHECK(json::parse(proc::slurp(js)) == report);
}

TEST_CASE("thread count does not change the output") {
  auto doc = demo("bounded-rank-one");
  doc["simulation"]["n"] = 3000;
  doc["bounds"] = json::array({"chernoff_sum"});
  const auto path = write_config(doc, "threads");
  const auto one = proc::run_cli("compare --config " + path, "SMALLDEV_THREADS=1");
  const auto four = proc::run_cli("compare --config " + path, "SMALLDEV_THREADS=4");
  REQUIRE(one.exit_code == 0);
  CHECK(one.out == four.out);
}

TEST_CASE("config parsing") {
  const auto cfg = load_config(proc::config_path("exponential-series"));
  CHECK(cfg.sources.size() == 3);
  CHECK(cfg.model().dim() == 3);
  CHECK(cfg.eps_grid.size() == 12);
  CHECK(cfg.eps_grid.front() == 0.02);
  CHECK(cfg.eps_grid.back() == 0.24);
  const auto rank = load_config(proc::config_path("bounded-rank-one"));
  CHECK(rank.sources.size() == 8);
  CHECK(rank.mgf.mode == MgfModel::Mode::empirical);
  CHECK(rank.eps_grid.size() == 20);
  CHECK(rank.eps_grid.back() == 0.99);

  ConfigOverrides ov;
  ov.seed = 9;
  ov.samples = 123;
  ov.coarse_points = 50;
  const auto o = load_config(proc::config_path("bernoulli-diagonal"), ov);
  CHECK(o.simulation.seed == 9);
  CHECK(o.mgf.seed == 9);
  CHECK(o.simulation.n == 123);
  CHECK(o.optimizer.coarse_points == 50);
  const json echo = o.resolved();
  CHECK(echo["simulation"]["seed"] == 9);
  CHECK_FALSE(echo.contains("output"));

  json bad = demo("exponential-series");
  bad["ensemble"]["sources"][1]["matrix"]["real"][0][1] = 7.0;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = demo("bernoulli-diagonal");
  bad["bounds"] = json::array({json{{"name", "g_theta"}}});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = demo("bernoulli-diagonal");
  bad["bounds"] = json::array({json{{"name", "g_theta"}, {"g", {{"kind", "power_envelope"}}}}});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = demo("bernoulli-diagonal");
  bad["bounds"] = json::array({"series_product"});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}
