#include <cmath>
#include <limits>

#include "ares/ares.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace ares;

namespace {

AresConfig default_config(double b_r = 1.0) {
  AresConfig c;
  c.bounds.b_r = b_r;
  return c;
}

// Runs ARES on a psi system and returns the policy for inspection.
Ares run_on_psi(double psi, std::size_t rounds, std::uint64_t seed) {
  const EnvParams p = make_psi_system(psi);
  Simulator sim(p);
  RandomStream rng(seed);
  EnvState st = sim.burn_in(1000, rng);
  Ares ares(p.num_arms(), p.context_dim(), default_config(2.0));
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::size_t arm = ares.select_action(t);
    const RoundOutcome out = sim.step(st, rng);
    ares.observe(t, arm, out.rewards(static_cast<Eigen::Index>(arm)), out.context);
  }
  return ares;
}

}  // namespace

TEST_CASE("window choice per arm and shared") {
  const auto equal = select_windows({{1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}});
  CHECK(equal.per_arm == std::vector<std::size_t>{0, 0});
  CHECK(equal.shared == 0);

  std::vector<double> a(11, 5.0), b(11, 5.0);
  a[8] = 1.0;
  b[10] = 1.0;
  const auto mixed = select_windows({a, b});
  CHECK(mixed.per_arm == std::vector<std::size_t>{8, 10});
  CHECK(mixed.shared == 10);

  std::vector<double> decreasing;
  for (int s = 0; s <= 10; ++s) decreasing.push_back(10.0 - s);
  CHECK(select_windows({decreasing}).per_arm[0] == 10);
}

TEST_CASE("warm-up bonus") {
  CHECK(std::isinf(warmup_bonus(0.1, 0)));
  // M = 2 log(1/delta) gives exactly one
  CHECK(warmup_bonus(std::exp(-2.0), 4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(warmup_bonus(0.1, 10) == doctest::Approx(std::sqrt(2.0 * std::log(10.0) / 10.0)));
}

TEST_CASE("first round perturbation with V = lambda I") {
  AresConfig cfg = default_config();
  cfg.bounds.lambda = 2.0;
  Ares ares(2, 1, cfg);
  const std::size_t arm = ares.select_action(0);
  CHECK(arm == 0);
  CHECK(ares.shared_window() == 0);
  // Theta = [1], so u = e * 1 / sqrt(lambda)
  RegressorState fresh(0, 1, 2.0);
  const double expected = fresh.bound_e(cfg.bounds) / std::sqrt(2.0);
  CHECK(ares.last_perturbation()[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::isinf(ares.last_scores()[0]));
  CHECK(std::isinf(ares.last_scores()[1]));
}

TEST_CASE("unpulled arms are forced and round zero only touches s = 0") {
  Ares ares(3, 1, default_config());
  std::vector<bool> seen(3, false);
  for (std::size_t t = 0; t < 3; ++t) {
    const std::size_t arm = ares.select_action(t);
    CHECK_FALSE(seen[arm]);
    seen[arm] = true;
    ares.observe(t, arm, 0.1 * static_cast<double>(t), Vector::Constant(1, 0.5));
    if (t == 0) {
      CHECK(ares.regressor(arm, 0).count() == 1);
      for (std::size_t s = 1; s <= ares.max_window(); ++s) CHECK(ares.regressor(arm, s).count() == 0);
    }
  }
  CHECK(seen == std::vector<bool>{true, true, true});
  // round 1 could only add the s = 1 regressor
  CHECK(ares.regressor(1, 1).count() == 1);
  CHECK(ares.regressor(1, 2).count() == 0);
}

TEST_CASE("accounting, window ranges and determinism on a psi system") {
  const std::size_t n = 800;
  const Ares a = run_on_psi(1.0, n, 21);
  const Ares b = run_on_psi(1.0, n, 21);
  std::size_t total = 0;
  for (std::size_t arm = 0; arm < 2; ++arm) {
    const std::size_t pulls = a.pull_rounds(arm).size();
    total += pulls;
    CHECK(a.warmup_pulls(arm) + a.steady_pulls(arm) == pulls);
    CHECK(a.chosen_window(arm) <= a.max_window());
    CHECK(a.pull_rounds(arm) == b.pull_rounds(arm));
  }
  CHECK(total == n);
  CHECK(a.shared_window() == std::max(a.chosen_window(0), a.chosen_window(1)));
}

TEST_CASE("selection is the argmax of the recorded scores, shift invariant") {
  const EnvParams p = make_psi_system(2.0);
  Simulator sim(p);
  RandomStream rng(5);
  EnvState st = sim.burn_in(1000, rng);
  Ares ares(2, 1, default_config(2.0));
  for (std::size_t t = 0; t < 300; ++t) {
    const std::size_t arm = ares.select_action(t);
    std::vector<double> shifted = ares.last_scores();
    CHECK(argmax(shifted) == arm);
    for (double& v : shifted) v += 123.5;
    CHECK(argmax(shifted) == arm);

    const SelectionInfo& info = ares.selection_info();
    CHECK(info.window.size() == 2);
    CHECK(info.perturbation == ares.last_perturbation());
    const RoundOutcome out = sim.step(st, rng);
    ares.observe(t, arm, out.rewards(static_cast<Eigen::Index>(arm)), out.context);
  }
}

TEST_CASE("observe updates cost before the sample enters the regressor") {
  Ares ares(1, 1, default_config());
  ares.select_action(0);
  ares.observe(0, 0, 3.0, Vector::Constant(1, 1.0));
  // the residual used was |3 - 0| since G was zero before the update
  CHECK(ares.regressor(0, 0).zeta() == doctest::Approx(0.01 * 3.0).epsilon(1e-14));
  CHECK(ares.regressor(0, 0).estimate()(0) == doctest::Approx(1.5));
}

TEST_CASE("regret stops growing on a noiseless frozen system") {
  EnvParams p;
  p.gamma = Matrix::Identity(2, 2);
  p.c_theta = Matrix::Identity(2, 2);
  p.q = Matrix::Zero(2, 2);
  p.r = Matrix::Zero(2, 2);
  p.mu = Vector::Zero(2);
  p.sigma0 = Matrix::Zero(2, 2);
  p.sigma_eta = 0.0;
  p.actions = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
  Simulator sim(p);
  RandomStream rng(1);
  EnvState st{Vector(2), 0};
  st.z << 0.0, 20.0;

  Ares ares(2, 2, default_config());
  std::vector<double> regret;
  double acc = 0.0;
  for (std::size_t t = 0; t < 500; ++t) {
    const std::size_t arm = ares.select_action(t);
    const RoundOutcome out = sim.step(st, rng);
    acc += out.optimal_reward - out.rewards(static_cast<Eigen::Index>(arm));
    regret.push_back(acc);
    ares.observe(t, arm, out.rewards(static_cast<Eigen::Index>(arm)), out.context);
  }
  CHECK(regret.back() == regret[250]);
  CHECK(regret.back() > 0.0);
}

TEST_CASE("bias-aware variant needs a bias model") {
  AresConfig cfg = default_config();
  cfg.perturbation = PerturbationKind::with_bias;
  CHECK_THROWS(Ares(2, 1, cfg));

  const EnvParams p = make_psi_system(1.0);
  const SteadyKalman sk = SteadyKalman::from(p);
  BiasModel model;
  model.state_cov = solve_lyapunov(p.gamma, p.q);
  for (std::size_t s = 0; s <= cfg.max_window; ++s) model.b_beta.push_back(bias_bound(sk, 1.0, s));
  cfg.bias_model = model;
  Ares ares(2, 1, cfg);
  Ares plain(2, 1, default_config());
  Simulator sim(p);
  RandomStream rng(3);
  EnvState st = sim.burn_in(100, rng);
  for (std::size_t t = 0; t < 50; ++t) {
    const std::size_t arm = ares.select_action(t);
    const RoundOutcome out = sim.step(st, rng);
    const double x = out.rewards(static_cast<Eigen::Index>(arm));
    plain.select_action(t);
    if (t >= 2)
      for (std::size_t a = 0; a < 2; ++a)
        CHECK(ares.last_perturbation()[a] >= 0.0);
    ares.observe(t, arm, x, out.context);
    plain.observe(t, arm, x, out.context);
  }
  // same data, same windows: the bias term only adds width
  const WindowChoice w = ares.select_windows();
  for (std::size_t a = 0; a < 2; ++a)
    CHECK(ares.perturbation(a, 50, w) >= plain.perturbation(a, 50, w));
}
