#include <doctest.h>

#include "oracles.hpp"
#include "smalldev/montecarlo.hpp"

#include <cmath>
#include <vector>

using namespace smalldev;

TEST_CASE("incomplete beta against closed forms") {
  // I_x(1, b) = 1 - (1-x)^b; I_x(a, 1) = x^a
  for (double x : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0}) {
    CHECK(std::abs(incomplete_beta(x, 1, 3.5) - (1 - std::pow(1 - x, 3.5))) <= 1e-13);
    CHECK(std::abs(incomplete_beta(x, 2.5, 1) - std::pow(x, 2.5)) <= 1e-13);
  }
  // binomial identity: P{Bin(n,p) <= k} = I_{1-p}(n-k, k+1)
  for (int k : {0, 3, 9}) {
    for (double p : {0.05, 0.4, 0.9}) {
      CHECK(std::abs(incomplete_beta(1 - p, 20 - k, k + 1) - oracle::binomial_cdf(k, 20, p)) <= 1e-12);
    }
  }
  CHECK(beta_quantile(0.5, 3, 3) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("Clopper-Pearson against brute-force binomial bisection") {
  const auto ci = clopper_pearson(5, 10, 0.95);
  CHECK(std::abs(ci.low - 0.18708602844739855) <= 1e-10);
  CHECK(std::abs(ci.high - 0.8129139715526015) <= 1e-10);
  struct Case {
    int hits, n;
    double conf;
  };
  for (const auto& c : {Case{5, 10, 0.95}, Case{0, 10, 0.99}, Case{10, 10, 0.99}, Case{1, 50, 0.99},
                        Case{37, 200, 0.9}, Case{199, 200, 0.99}, Case{3, 1000, 0.99}}) {
    const auto got = clopper_pearson(c.hits, c.n, c.conf);
    const auto [lo, hi] = oracle::clopper_pearson_bruteforce(c.hits, c.n, c.conf);
    CHECK(std::abs(got.low - lo) <= 1e-10);
    CHECK(std::abs(got.high - hi) <= 1e-10);
  }
}

TEST_CASE("Clopper-Pearson edge cases") {
  for (int n : {1, 7, 1000}) {
    const auto z = clopper_pearson(0, n, 0.99);
    CHECK(z.low == 0.0);
    // P{Bin(n, high) = 0} = 0.005
    CHECK(std::abs(z.high - (1 - std::pow(0.005, 1.0 / n))) <= 1e-10);
    CHECK(std::abs(oracle::binomial_cdf(0, n, z.high) - 0.005) <= 1e-9);
    const auto f = clopper_pearson(n, n, 0.99);
    CHECK(f.high == 1.0);
    CHECK(std::abs(f.low - std::pow(0.005, 1.0 / n)) <= 1e-10);
  }
  CHECK_THROWS_AS(clopper_pearson(3, 2, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(0, 0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(1, 2, 1.5), std::invalid_argument);
}

TEST_CASE("deterministic model") {
  const SumModel m({MatrixSource::bernoulli_diagonal(2, 1.0, 1.0)});
  const std::vector<double> grid = {0.5, 2.0};
  EstimateOptions opt;
  opt.n = 1000;
  const auto est = estimate(m, grid, opt);
  CHECK(est[0].hits == 0);
  CHECK(est[0].p_hat == 0.0);
  CHECK(est[1].hits == 1000);
  CHECK(est[1].p_hat == 1.0);
}

TEST_CASE("K=10 Bernoulli at 0.5: binomial oracle") {
  const SumModel m(std::vector<MatrixSource>(10, MatrixSource::bernoulli_diagonal(1, 0.5, 1.0)));
  const std::vector<double> grid = {0.5};
  EstimateOptions opt;
  opt.n = 100000;
  opt.seed = 42;
  const auto est = estimate(m, grid, opt);
  const double truth = std::pow(2.0, -10);
  CHECK(est[0].ci_low <= truth);
  CHECK(truth <= est[0].ci_high);
  CHECK(est[0].confidence == 0.99);
}

TEST_CASE("shared-sample monotonicity and thread independence") {
  const SumModel m(std::vector<MatrixSource>(4, MatrixSource::bounded_rank_one(3, 1.0)));
  std::vector<double> grid;
  for (int i = 1; i <= 30; ++i) grid.push_back(0.05 * i);
  EstimateOptions opt;
  opt.n = 5000;
  opt.seed = 7;
  opt.threads = 1;
  const auto one = estimate(m, grid, opt);
  for (std::size_t i = 1; i < one.size(); ++i) {
    CHECK(one[i - 1].hits <= one[i].hits);
    CHECK(one[i - 1].p_hat <= one[i].p_hat);
  }
  for (unsigned t : {2u, 3u, 4u, 7u}) {
    opt.threads = t;
    const auto other = estimate(m, grid, opt);
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(other[i].hits == one[i].hits);
      CHECK(other[i].ci_low == one[i].ci_low);
    }
  }
  CHECK(sample_lambda_max(m, 100, 7, 1) == sample_lambda_max(m, 100, 7, 4));
  // draw j is RngStream(seed, j)
  CHECK(sample_lambda_max(m, 10, 7, 3)[6] == sample_sum_lambda_max(m, RngStream(7, 6)));
}

TEST_CASE("estimate preconditions") {
  const SumModel m({MatrixSource::bernoulli_diagonal(1, 0.5, 1.0)});
  EstimateOptions opt;
  opt.n = 10;
  const std::vector<double> unsorted = {0.5, 0.2};
  CHECK_THROWS_AS(estimate(m, unsorted, opt), std::invalid_argument);
  const std::vector<double> dup = {0.5, 0.5};
  CHECK_THROWS_AS(estimate(m, dup, opt), std::invalid_argument);
  const std::vector<double> ok = {0.5};
  opt.n = 0;
  CHECK_THROWS_AS(estimate(m, ok, opt), std::invalid_argument);
}

TEST_CASE("coverage of the 99% interval on the binomial ensemble") {
  // 100 independent seeds; each interval misses with probability <= 1%, so at
  // least 95 covering is a loose check (P{>5 misses} < 1e-3 under Bin(100, 0.01)).
  const SumModel m(std::vector<MatrixSource>(6, MatrixSource::bernoulli_diagonal(1, 0.5, 1.0)));
  const std::vector<double> grid = {0.5, 2.5};
  const double truth[] = {std::pow(0.5, 6), oracle::binomial_cdf(2, 6, 0.5)};
  int covered[2] = {0, 0};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    EstimateOptions opt;
    opt.n = 10000;
    opt.seed = seed * 7919;
    const auto est = estimate(m, grid, opt);
    for (int i = 0; i < 2; ++i) covered[i] += est[i].ci_low <= truth[i] && truth[i] <= est[i].ci_high;
  }
  CHECK(covered[0] >= 95);
  CHECK(covered[1] >= 95);
}

TEST_CASE("compare") {
  std::vector<EmpiricalEstimate> est = {{0.1, 100, 5, 0.05, 0.01, 0.13, 0.99}, {0.2, 100, 20, 0.2, 0.11, 0.32, 0.99}};
  auto table_of = [](double v) {
    BoundTable t;
    t.push_back({"b", {make_bound_result("b", 0.1, v, std::nullopt, true), make_bound_result("b", 0.2, v, std::nullopt, true)}});
    return t;
  };
  const auto ones = compare(table_of(1.0), est);
  CHECK(ones.violations == 0);
  CHECK(ones.rows.size() == 2);
  const auto zeros = compare(table_of(0.0), est);
  CHECK(zeros.violations == 2);
  CHECK_FALSE(zeros.rows[0].dominated);
  // value equal to ci_low is dominated
  const auto edge = compare(table_of(0.11), est);
  CHECK(edge.violations == 0);
  CHECK(edge.rows[1].dominated);

  BoundTable shifted;
  shifted.push_back({"b", {make_bound_result("b", 0.1, 1, std::nullopt, true), make_bound_result("b", 0.3, 1, std::nullopt, true)}});
  CHECK_THROWS_AS(compare(shifted, est), std::invalid_argument);
  BoundTable short_table;
  short_table.push_back({"b", {make_bound_result("b", 0.1, 1, std::nullopt, true)}});
  CHECK_THROWS_AS(compare(short_table, est), std::invalid_argument);
}
