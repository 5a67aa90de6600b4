#include <doctest.h>

#include "smalldev/errors.hpp"
#include "smalldev/optimizer.hpp"
#include "smalldev/rng.hpp"

#include <cmath>
#include <limits>

using namespace smalldev;

TEST_CASE("quadratic") {
  const auto r = minimize([](double t) { return (t - 3) * (t - 3) + 1; });
  CHECK(std::abs(r.theta_star - 3.0) < 1e-6);
  CHECK(std::abs(r.f_star - 1.0) < 1e-6);
  CHECK_FALSE(r.at_boundary);
}

TEST_CASE("scalar Chernoff objective recovers log(mu/eps)") {
  const double eps = 0.5, mu = 5.0;
  const auto r = minimize([&](double t) { return t * eps + mu * (std::exp(-t) - 1); });
  const double theta = std::log(mu / eps);
  CHECK(std::abs(r.theta_star - theta) < 1e-6 * theta);
  const double f = eps * theta + mu * (eps / mu - 1);
  CHECK(std::abs(r.f_star - f) < 1e-9 * std::abs(f));
  CHECK(r.f_star == doctest::Approx(-3.348).epsilon(1e-3));
}

TEST_CASE("exponential single-matrix objective has theta* = 1/eps - 1") {
  const double eps = 0.1;
  const auto r = minimize([&](double t) { return t * eps - std::log1p(t); });
  CHECK(std::abs(r.theta_star - 9.0) < 1e-6 * 9.0);
  CHECK(std::abs(r.f_star - (0.9 - std::log(10.0))) < 1e-12);
}

TEST_CASE("f_star is below random probes") {
  RngStream rng(31, 0);
  const std::function<double(double)> fs[] = {
      [](double t) { return t * 0.2 + 3 * std::log(1 / (1 + t)); },
      [](double t) { return std::sin(std::log(t)) + 0.01 * std::log(t) * std::log(t); },
      [](double t) { return t * 0.05 + 8 * (std::exp(-t) - 1) / 1.0; },
      [](double t) { return std::abs(std::log(t) - 2.0); },
  };
  for (const auto& f : fs) {
    const OptimizerConfig cfg;
    const auto r = minimize(f, cfg);
    for (int i = 0; i < 1000; ++i) {
      const double t = std::exp(std::log(cfg.theta_min) + rng.uniform() * std::log(cfg.theta_max / cfg.theta_min));
      CHECK(r.f_star <= f(t) + 1e-9 * std::max(1.0, std::abs(r.f_star)));
    }
  }
}

TEST_CASE("boundary minima are flagged") {
  const auto down = minimize([](double t) { return -t; });
  CHECK(down.at_boundary);
  CHECK(down.theta_star == doctest::Approx(1e6));
  const auto up = minimize([](double t) { return t; });
  CHECK(up.at_boundary);
  CHECK(up.theta_star == doctest::Approx(1e-6));
}

TEST_CASE("non-finite values are +inf; all non-finite throws") {
  const auto r = minimize([](double t) { return t < 1.0 ? std::numeric_limits<double>::quiet_NaN() : (t - 2) * (t - 2); });
  CHECK(r.theta_star == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(minimize([](double) { return std::numeric_limits<double>::infinity(); }), NoFiniteValue);
}

TEST_CASE("deterministic") {
  auto f = [](double t) { return std::cos(t) + 0.001 * t; };
  const auto a = minimize(f), b = minimize(f);
  CHECK(a.theta_star == b.theta_star);
  CHECK(a.f_star == b.f_star);
}

TEST_CASE("config validation") {
  OptimizerConfig c;
  c.theta_min = 2;
  c.theta_max = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.coarse_points = 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.theta_min = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(OptimizerConfig{}.validate());
}
