#include "ares/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ares/ares.hpp"
#include "ares/baselines.hpp"

namespace ares {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

bool is_pies(const std::string& id) { return id.rfind("pies-s", 0) == 0; }

std::size_t pies_window_of(const std::string& id) {
  return static_cast<std::size_t>(std::stoul(id.substr(6)));
}

}  // namespace

SystemSetup make_system_setup(double psi, const ExperimentConfig& config) {
  SystemSetup out;
  out.psi = psi;
  out.params = make_psi_system(psi, config.state_dim);
  out.params.validate();
  out.steady = SteadyKalman::from(out.params);
  out.state_cov = solve_lyapunov(out.params.gamma, out.params.q);
  out.generator_rho = spectral_radius(out.params.gamma);
  out.closed_loop_rho = spectral_radius(out.steady.closed_loop);
  out.max_innovation_variance = out.steady.max_innovation_variance(out.params);

  out.bounds = config.bounds;
  out.bounds.b_r = config.b_r_override.value_or(std::sqrt(out.max_innovation_variance));
  out.bounds.validate();

  out.settings = config.settings;
  if (!out.settings.rexp3_clip) {
    double worst = 0.0;
    for (const auto& c : out.params.actions) worst = std::max(worst, c.dot(out.state_cov * c));
    const double se = out.params.sigma_eta;
    out.settings.rexp3_clip = 3.0 * std::sqrt(worst + se * se);
  }

  out.bias_model.state_cov = out.state_cov;
  for (std::size_t s = 0; s <= config.settings.ares_max_window; ++s)
    out.bias_model.b_beta.push_back(bias_bound(out.steady, out.bounds.b_c, s));
  return out;
}

std::uint64_t simulation_seed(std::uint64_t base_seed, std::size_t sim, std::size_t psi_index) {
  return base_seed ^ mix_seed((static_cast<std::uint64_t>(sim) << 16) ^
                              static_cast<std::uint64_t>(psi_index));
}

std::uint64_t policy_seed(std::uint64_t sim_seed, std::string_view policy_id) {
  return mix_seed(sim_seed ^ fnv1a(policy_id));
}

std::vector<double> compute_regret(std::span<const double> optimal,
                                   std::span<const double> realized) {
  if (optimal.size() != realized.size())
    throw DimensionError("compute_regret: sequences differ in length");
  std::vector<double> out(optimal.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < optimal.size(); ++t) {
    acc += optimal[t] - realized[t];
    out[t] = acc;
  }
  return out;
}

SimulationTrace simulate_cell(const SystemSetup& system, const ExperimentConfig& config,
                              std::uint64_t seed) {
  const EnvParams& params = system.params;
  const std::size_t k = params.num_arms();
  const std::size_t n = config.horizon;

  // One tape per cell: every policy sees the same contexts and reward draws.
  Simulator sim(params);
  RandomStream rng(seed);
  EnvState state = sim.burn_in(config.burn_in, rng);
  std::vector<RoundOutcome> tape;
  tape.reserve(n);
  for (std::size_t t = 0; t < n; ++t) tape.push_back(sim.step(state, rng));

  std::vector<double> optimal(n);
  for (std::size_t t = 0; t < n; ++t) optimal[t] = tape[t].optimal_reward;

  SimulationTrace trace;
  trace.seed = seed;
  trace.regret.reserve(config.policies.size());

  for (const auto& id : config.policies) {
    PolicyContext ctx;
    ctx.params = &params;
    ctx.horizon = n;
    ctx.bounds = system.bounds;
    ctx.settings = system.settings;
    ctx.seed = policy_seed(seed, id);
    if (config.instrumented) ctx.bias_model = system.bias_model;
    auto policy = make_policy(id, ctx);

    const bool record_ares = id == "ares";
    const bool record_pies = is_pies(id);
    const auto* ares_policy = dynamic_cast<const AresPolicy*>(policy.get());
    std::optional<BiasTracker> tracker;
    if (record_ares) {
      trace.ares_u.assign(n * k, kNaN);
      trace.ares_s.assign(n * k, kNaN);
      if (config.instrumented) {
        tracker.emplace(params, system.steady, config.settings.ares_max_window);
        trace.ares_abs_bias.assign(n * k, kNaN);
        trace.ares_b_width.assign(n * k, kNaN);
      }
    }
    std::vector<double> residuals;
    if (record_pies) residuals.assign(n * k, kNaN);

    std::vector<double> realized(n);
    std::vector<std::size_t> arms(n);
    double mean_gap = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const RoundOutcome& out = tape[t];
      const std::size_t arm = policy->select(t);
      if (arm >= k) throw std::logic_error("policy " + id + " returned an invalid arm");

      if (const SelectionInfo* info = policy->selection_info()) {
        if (record_ares) {
          for (std::size_t a = 0; a < k; ++a) {
            if (a < info->perturbation.size()) trace.ares_u[t * k + a] = info->perturbation[a];
            if (a < info->window.size())
              trace.ares_s[t * k + a] = static_cast<double>(info->window[a]);
          }
          if (tracker && ares_policy != nullptr) {
            const Ares& core = ares_policy->core();
            const std::size_t shared = core.shared_window();
            const auto theta = core.contexts().theta(shared);
            for (std::size_t a = 0; a < k; ++a) {
              if (auto b = tracker->beta(a, core.chosen_window(a)))
                trace.ares_abs_bias[t * k + a] = std::abs(*b);
              if (theta) {
                const RegressorState& reg = core.regressor(a, shared);
                const double extra =
                    reg.bound_b(system.bounds, system.bias_model.b_beta.at(shared),
                                system.state_cov) -
                    reg.bound_e(system.bounds);
                trace.ares_b_width[t * k + a] = extra * std::sqrt(reg.quad_form(*theta));
              }
            }
          }
        }
        if (record_pies) {
          for (std::size_t a = 0; a < k && a < info->prediction.size(); ++a)
            if (info->prediction[a])
              residuals[t * k + a] = std::abs(out.rewards[static_cast<Eigen::Index>(a)] -
                                              *info->prediction[a]);
        }
      }

      const double reward = out.rewards[static_cast<Eigen::Index>(arm)];
      realized[t] = reward;
      arms[t] = arm;
      mean_gap += out.mean_rewards[static_cast<Eigen::Index>(out.optimal_arm)] -
                  out.mean_rewards[static_cast<Eigen::Index>(arm)];
      policy->observe(t, arm, reward, out.context);
      if (tracker) tracker->push(out.context);
    }

    trace.regret.push_back(compute_regret(optimal, realized));
    trace.final_mean_gap.push_back(mean_gap);
    trace.arms.push_back(std::move(arms));
    if (record_pies) trace.pies_residuals.push_back(std::move(residuals));
  }
  return trace;
}

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DimensionError("nearest_rank: empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("nearest_rank: p must be in (0, 1]");
  const double n = static_cast<double>(sorted.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Quantiles nearest_rank_quantiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return {nearest_rank(values, 0.25), nearest_rank(values, 0.5), nearest_rank(values, 0.75)};
}

PsiReport aggregate(const SystemSetup& system, const ExperimentConfig& config,
                    const std::vector<SimulationTrace>& traces) {
  if (traces.empty()) throw DimensionError("aggregate: no simulations");
  const std::size_t k = system.params.num_arms();
  const std::size_t n = config.horizon;
  const std::size_t np = config.policies.size();
  const std::size_t sims = traces.size();

  PsiReport rep;
  rep.psi = system.psi;
  rep.generator_rho = system.generator_rho;
  rep.closed_loop_rho = system.closed_loop_rho;
  rep.max_innovation_variance = system.max_innovation_variance;
  rep.b_r = system.bounds.b_r;
  rep.rexp3_clip = system.settings.rexp3_clip.value_or(kNaN);
  rep.num_arms = k;
  for (const auto& tr : traces) rep.seeds.push_back(tr.seed);

  auto index_of = [&](const std::string& id) -> std::optional<std::size_t> {
    auto it = std::find(config.policies.begin(), config.policies.end(), id);
    if (it == config.policies.end()) return std::nullopt;
    return static_cast<std::size_t>(it - config.policies.begin());
  };
  const auto oracle = index_of("oracle");
  const auto ares_idx = index_of("ares");

  rep.final_regrets.assign(np, std::vector<double>(sims));
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t i = 0; i < sims; ++i) rep.final_regrets[p][i] = traces[i].regret[p].back();

  std::vector<double> column(sims);
  for (std::size_t p = 0; p < np; ++p) {
    PolicyCurve curve;
    curve.policy = config.policies[p];
    curve.per_round.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < sims; ++i) column[i] = traces[i].regret[p][t];
      curve.per_round.push_back(nearest_rank_quantiles(column));
    }
    curve.final_regret = curve.per_round.back();
    for (std::size_t i = 0; i < sims; ++i) column[i] = traces[i].final_mean_gap[p];
    curve.final_mean_gap = nearest_rank_quantiles(column);
    if (ares_idx && p != *ares_idx) {
      for (std::size_t i = 0; i < sims; ++i) {
        const double r_alg = rep.final_regrets[p][i];
        const double r_ares = rep.final_regrets[*ares_idx][i];
        column[i] = (r_alg - r_ares) / r_alg * 100.0;
      }
      curve.pct_decrease_vs_ares = nearest_rank_quantiles(column);
    }
    rep.curves.push_back(std::move(curve));
  }

  for (std::size_t p = 0; p < np; ++p) {
    auto& curve = rep.curves[p];
    curve.normalized.assign(n, kNaN);
    if (!config.normalize || !oracle) continue;
    for (std::size_t t = 0; t < n; ++t) {
      const double denom = rep.curves[*oracle].per_round[t].median;
      if (denom > 0.0) curve.normalized[t] = curve.per_round[t].median / denom;
    }
  }

  // Means over simulations, skipping NaN entries.
  auto mean_over = [&](auto&& get, std::size_t len) {
    std::vector<double> out(len, kNaN);
    for (std::size_t j = 0; j < len; ++j) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (const auto& tr : traces) {
        const double v = get(tr, j);
        if (std::isnan(v)) continue;
        sum += v;
        ++cnt;
      }
      if (cnt > 0) out[j] = sum / static_cast<double>(cnt);
    }
    return out;
  };
  auto tail_mean = [&](const std::vector<double>& per_round, std::size_t arm) {
    const std::size_t start = n > config.tail_rounds ? n - config.tail_rounds : 0;
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t t = start; t < n; ++t) {
      const double v = per_round[t * k + arm];
      if (std::isnan(v)) continue;
      sum += v;
      ++cnt;
    }
    return cnt > 0 ? sum / static_cast<double>(cnt) : kNaN;
  };

  rep.has_ares = ares_idx.has_value();
  if (rep.has_ares) {
    rep.mean_u = mean_over([](const SimulationTrace& tr, std::size_t j) { return tr.ares_u[j]; },
                           n * k);
    rep.mean_s = mean_over([](const SimulationTrace& tr, std::size_t j) { return tr.ares_s[j]; },
                           n * k);
    if (config.instrumented) {
      rep.mean_abs_bias = mean_over(
          [](const SimulationTrace& tr, std::size_t j) { return tr.ares_abs_bias[j]; }, n * k);
      rep.mean_b_width = mean_over(
          [](const SimulationTrace& tr, std::size_t j) { return tr.ares_b_width[j]; }, n * k);
    }
    for (std::size_t a = 0; a < k; ++a) rep.tail_mean_s.push_back(tail_mean(rep.mean_s, a));
  }

  std::size_t q = 0;
  for (const auto& id : config.policies) {
    if (!is_pies(id)) continue;
    rep.residual_windows.push_back(pies_window_of(id));
    rep.mean_residual.push_back(mean_over(
        [q](const SimulationTrace& tr, std::size_t j) { return tr.pies_residuals[q][j]; }, n * k));
    std::vector<double> tails;
    for (std::size_t a = 0; a < k; ++a) tails.push_back(tail_mean(rep.mean_residual.back(), a));
    rep.tail_residual.push_back(std::move(tails));
    ++q;
  }
  return rep;
}

AggregateReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  AggregateReport report;
  report.config = config;

  std::size_t workers = config.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.num_sims);

  for (std::size_t pi = 0; pi < config.psi_values.size(); ++pi) {
    const SystemSetup system = make_system_setup(config.psi_values[pi], config);
    std::vector<SimulationTrace> traces(config.num_sims);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= config.num_sims) return;
        try {
          traces[i] = simulate_cell(system, config, simulation_seed(config.base_seed, i, pi));
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = config.num_sims;
        }
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    report.systems.push_back(aggregate(system, config, traces));
  }
  return report;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string psi_label(double psi) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", psi);
  return buf;
}

}  // namespace ares
