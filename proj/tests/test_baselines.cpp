#include <cmath>
#include <numbers>

#include "ares/baselines.hpp"
#include "ares/harness.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace ares;

TEST_CASE("UCB rule") {
  CHECK(ucb_select(std::vector<double>{5.0, 0.0}, std::vector<std::size_t>{0, 5}, 0.1) == 0);
  CHECK(ucb_select(std::vector<double>{0.0, 5.0}, std::vector<std::size_t>{5, 0}, 0.1) == 1);
  CHECK(ucb_select(std::vector<double>{1.0, 0.5}, std::vector<std::size_t>{4, 4}, 0.1) == 0);
  // 0 + 2.146 beats 0.5 + 0.2146
  CHECK(ucb_select(std::vector<double>{0.0, 0.5}, std::vector<std::size_t>{1, 100}, 0.1) == 0);
  CHECK_THROWS_AS(ucb_select(std::vector<double>{1.0}, std::vector<std::size_t>{1, 2}, 0.1),
                  DimensionError);
}

TEST_CASE("sliding window forgets old pulls") {
  SlidingWindowStats st(2, 3);
  st.push(1, 10.0);
  st.push(0, 1.0);
  st.push(0, 1.0);
  CHECK(st.count(1) == 1);
  st.push(0, 1.0);
  CHECK(st.count(1) == 0);
  CHECK(st.mean(1) == 0.0);
  CHECK(st.count(0) == 3);
  CHECK(st.plays() == 4);
  CHECK(swucb_select(st, st.plays(), 2.0) == 1);
}

TEST_CASE("SW-UCB with an unbounded window follows a plain UCB of the same bonus") {
  const std::size_t n = 3000;
  SlidingWindowUcbPolicy sw("swucb", 2, n + 1, 2.0);
  RandomStream env(9);
  std::vector<double> sums(2, 0.0);
  std::vector<std::size_t> counts(2, 0);
  for (std::size_t t = 0; t < n; ++t) {
    // reference rule written out directly
    std::size_t ref = 0;
    double best = -INFINITY;
    for (std::size_t a = 0; a < 2; ++a) {
      const double idx =
          counts[a] == 0
              ? INFINITY
              : sums[a] / counts[a] +
                    2.0 * std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(t, 1))) /
                                    static_cast<double>(counts[a]));
      if (idx > best) {
        best = idx;
        ref = a;
      }
    }
    const std::size_t arm = sw.select(t);
    CHECK(arm == ref);
    const double x = (arm == 0 ? 0.6 : 0.4) + 0.3 * env.gaussian();
    sums[arm] += x;
    ++counts[arm];
    sw.observe(t, arm, x, Vector::Zero(1));
  }
}

TEST_CASE("Exp3 pieces") {
  const std::vector<double> w{0.7, 0.3};
  auto p = exp3_probabilities(w, 1.0);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  p = exp3_probabilities(w, 0.2);
  CHECK(p[0] == doctest::Approx(0.8 * 0.7 + 0.1));

  std::vector<double> weights{0.5, 0.5};
  exp3_update(weights, 0, 1.0, 0.5, 0.1);
  const double up = std::exp(0.1 * 2.0 / 2.0);
  CHECK(weights[0] == doctest::Approx(up / (up + 1.0)));
  CHECK(weights[0] + weights[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Rexp3 defaults") {
  const double raw = std::ceil(std::cbrt(2.0 * std::log(2.0) * 5000.0 * 5000.0));
  CHECK(rexp3_default_batch(2, 5000) == static_cast<std::size_t>(raw));
  CHECK(rexp3_default_batch(2, 10) == 10);
  CHECK(rexp3_default_batch(2, 100) == 50);
  const double g = std::sqrt(2.0 * std::log(2.0) / ((std::numbers::e - 1.0) * 326.0));
  CHECK(rexp3_default_gamma(2, 326) == doctest::Approx(g));
  CHECK(rexp3_default_gamma(10, 1) == 1.0);
}

TEST_CASE("Rexp3 restarts, mixing and learning") {
  SUBCASE("weights reset at the batch boundary and stay a distribution") {
    Rexp3Policy pol("rexp3", 2, 20, 0.3, 1.0, 4);
    for (std::size_t t = 0; t < 100; ++t) {
      const std::size_t arm = pol.select(t);
      if (t % 20 == 0)
        for (double w : pol.weights()) CHECK(w == 0.5);
      double sum = 0.0;
      for (double w : pol.weights()) {
        CHECK(w > 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      pol.observe(t, arm, arm == 0 ? 1.0 : -1.0, Vector::Zero(1));
    }
  }
  SUBCASE("full mixing is uniform") {
    Rexp3Policy pol("rexp3", 2, 1000, 1.0, 1.0, 5);
    std::size_t zeros = 0;
    const std::size_t n = 20000;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t arm = pol.select(t);
      zeros += arm == 0;
      pol.observe(t, arm, arm == 0 ? 1.0 : -1.0, Vector::Zero(1));
    }
    CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) < 0.02);
  }
  SUBCASE("a dominant arm is found") {
    const std::size_t n = 10000;
    // clip = 1 maps reward 1 to 1 and reward -1 to 0
    Rexp3Policy pol("rexp3", 2, n, 0.1, 1.0, 6);
    std::size_t zeros = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t arm = pol.select(t);
      zeros += arm == 0;
      pol.observe(t, arm, arm == 0 ? 1.0 : -1.0, Vector::Zero(1));
    }
    CHECK(static_cast<double>(zeros) / n > 0.9);
  }
}

TEST_CASE("PIES round robin then greedy") {
  const std::vector<double> zero{0.0, 0.0};
  std::vector<std::size_t> arms;
  for (std::size_t t = 0; t < 6; ++t) arms.push_back(pies_step(t, 3, 2, zero));
  CHECK(arms == std::vector<std::size_t>{0, 1, 0, 1, 0, 1});
  CHECK(pies_step(6, 3, 2, zero) == 0);
  CHECK(pies_step(6, 3, 2, std::vector<double>{0.1, 0.2}) == 1);

  // exploration longer than the run just keeps cycling
  PiesPolicy pol("pies-s50", 2, 1, 50, 1.0);
  for (std::size_t t = 0; t < 40; ++t) {
    CHECK(pol.select(t) == t % 2);
    pol.observe(t, t % 2, 0.0, Vector::Zero(1));
  }
}

TEST_CASE("PIES regressors see only their own arm once history is long enough") {
  PiesPolicy pol("pies-s2", 2, 1, 2, 1.0);
  for (std::size_t t = 0; t < 10; ++t) {
    const std::size_t arm = pol.select(t);
    pol.observe(t, arm, 1.0, Vector::Constant(1, static_cast<double>(t)));
  }
  CHECK(pol.regressor(0).count() + pol.regressor(1).count() == 8);
  const SelectionInfo* info = pol.selection_info();
  REQUIRE(info != nullptr);
  CHECK(info->prediction[0].has_value());
}

TEST_CASE("random policy") {
  RandomPolicy one("random", 1, 1);
  for (std::size_t t = 0; t < 10; ++t) CHECK(one.select(t) == 0);

  RandomPolicy two("random", 2, 2);
  std::size_t zeros = 0;
  const std::size_t n = 100000;
  for (std::size_t t = 0; t < n; ++t) zeros += two.select(t) == 0;
  const double f = static_cast<double>(zeros) / n;
  CHECK(f >= 0.49);
  CHECK(f <= 0.51);

  RandomPolicy a("random", 5, 77), b("random", 5, 77);
  for (std::size_t t = 0; t < 100; ++t) CHECK(a.select(t) == b.select(t));
}

TEST_CASE("policy registry") {
  CHECK(is_known_policy("pies-s7"));
  CHECK_FALSE(is_known_policy("pies-s0"));
  CHECK_FALSE(is_known_policy("pies-sx"));
  CHECK_FALSE(is_known_policy("thompson"));
  const EnvParams p = make_psi_system(1.0);
  PolicyContext ctx;
  ctx.params = &p;
  ctx.horizon = 100;
  for (const auto& id : default_policy_ids()) {
    auto pol = make_policy(id, ctx);
    CHECK(pol->id() == id);
  }
  CHECK_THROWS_AS(make_policy("thompson", ctx), std::invalid_argument);
  CHECK_THROWS_AS(make_policy("ares-b", ctx), std::invalid_argument);
}

TEST_CASE("PIES with s = 10 beats s = 1 on the psi = 4 system") {
  ExperimentConfig cfg;
  cfg.psi_values = {4.0};
  cfg.policies = {"pies-s1", "pies-s10"};
  cfg.normalize = false;
  cfg.num_sims = 50;
  const AggregateReport rep = run_experiment(cfg);
  CHECK(rep.systems[0].curves[1].final_regret.median < rep.systems[0].curves[0].final_regret.median);
}
