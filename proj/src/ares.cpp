#include "ares/ares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ares {

WindowChoice select_windows(const std::vector<std::vector<double>>& costs) {
  WindowChoice out;
  out.per_arm.reserve(costs.size());
  for (const auto& per_s : costs) {
    if (per_s.empty()) throw std::invalid_argument("select_windows: empty cost row");
    out.per_arm.push_back(argmin(per_s));
    out.shared = std::max(out.shared, out.per_arm.back());
  }
  return out;
}

double warmup_bonus(double delta, std::size_t pulls) {
  if (pulls == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * std::log(1.0 / delta) / static_cast<double>(pulls));
}

Ares::Ares(std::size_t num_arms, std::size_t context_dim, AresConfig config)
    : config_(std::move(config)),
      window_(config_.max_window, context_dim),
      m_count_(num_arms, 0),
      n_count_(num_arms, 0),
      pull_rounds_(num_arms),
      reward_sum_(num_arms, 0.0),
      chosen_s_(num_arms, 0),
      last_u_(num_arms, 0.0),
      last_score_(num_arms, 0.0) {
  if (num_arms == 0) throw std::invalid_argument("Ares: need at least one arm");
  config_.bounds.validate();
  if (config_.perturbation == PerturbationKind::with_bias) {
    if (!config_.bias_model || config_.bias_model->b_beta.size() <= config_.max_window)
      throw std::invalid_argument("Ares: bias-aware perturbation needs B_beta for every window");
  }
  regressors_.resize(num_arms);
  for (auto& bank : regressors_) {
    bank.reserve(config_.max_window + 1);
    for (std::size_t s = 0; s <= config_.max_window; ++s)
      bank.emplace_back(s, context_dim, config_.bounds.lambda);
  }
  info_.perturbation.assign(num_arms, 0.0);
  info_.window.assign(num_arms, 0);
  info_.prediction.assign(num_arms, std::nullopt);
}

WindowChoice Ares::select_windows() const {
  std::vector<std::vector<double>> costs(num_arms());
  for (std::size_t a = 0; a < num_arms(); ++a) {
    costs[a].reserve(config_.max_window + 1);
    for (const auto& reg : regressors_[a]) costs[a].push_back(reg.cost());
  }
  return ares::select_windows(costs);
}

double Ares::warm_mean(std::size_t arm) const {
  const std::size_t pulls = pull_rounds_[arm].size();
  return pulls == 0 ? 0.0 : reward_sum_[arm] / static_cast<double>(pulls);
}

bool Ares::past_warmup(std::size_t arm, std::size_t round) const {
  return round >= chosen_s_[arm];
}

double Ares::perturbation(std::size_t arm, std::size_t round,
                          const WindowChoice& windows) const {
  const BoundParams& bp = config_.bounds;
  if (round >= windows.per_arm.at(arm)) {
    if (auto theta = window_.theta(windows.shared)) {
      const RegressorState& reg = regressors_[arm][windows.shared];
      const double width = std::sqrt(reg.quad_form(*theta));
      if (config_.perturbation == PerturbationKind::with_bias) {
        const BiasModel& bias = *config_.bias_model;
        return reg.bound_b(bp, bias.b_beta[windows.shared], bias.state_cov) * width;
      }
      return reg.bound_e(bp) * width;
    }
  }
  return warmup_bonus(bp.delta, m_count_[arm]);
}

std::size_t Ares::select_action(std::size_t round) {
  if (config_.refresh_all_penalties) {
    for (auto& bank : regressors_)
      for (auto& reg : bank)
        if (reg.count() > 0)
          if (auto theta = window_.theta(reg.window())) reg.refresh_cost(*theta, config_.bounds);
  }

  const WindowChoice windows = select_windows();
  chosen_s_ = windows.per_arm;
  s_shared_ = windows.shared;

  const bool shared_ready = window_.theta(windows.shared).has_value();
  for (std::size_t a = 0; a < num_arms(); ++a) {
    const double u = perturbation(a, round, windows);
    last_u_[a] = u;
    info_.perturbation[a] = u;
    info_.window[a] = chosen_s_[a];
    info_.prediction[a].reset();

    const auto theta = window_.theta(chosen_s_[a]);
    if (pull_rounds_[a].empty()) {
      // Never pulled: maximal optimism forces one sample per arm.
      last_score_[a] = std::numeric_limits<double>::infinity();
      if (theta) info_.prediction[a] = regressors_[a][chosen_s_[a]].predict(*theta);
    } else if (past_warmup(a, round) && theta && shared_ready) {
      const double prediction = regressors_[a][chosen_s_[a]].predict(*theta);
      info_.prediction[a] = prediction;
      last_score_[a] = prediction + u;
    } else {
      last_score_[a] = warm_mean(a) + u;
    }
  }
  return argmax(last_score_);
}

void Ares::observe(std::size_t round, std::size_t arm, double reward, const Vector& context) {
  if (arm >= num_arms()) throw std::out_of_range("Ares::observe: arm index out of range");
  pull_rounds_[arm].push_back(round);
  reward_sum_[arm] += reward;
  if (past_warmup(arm, round))
    ++n_count_[arm];
  else
    ++m_count_[arm];

  const std::size_t deepest = std::min(round, config_.max_window);
  for (std::size_t s = 0; s <= deepest; ++s) {
    const auto theta = window_.theta(s);
    if (!theta) break;
    RegressorState& reg = regressors_[arm][s];
    reg.update_window_cost(*theta, reward, config_.bounds);
    reg.update(*theta, reward);
  }
  window_.push(context);
}

AresPolicy::AresPolicy(std::string id, std::size_t num_arms, std::size_t context_dim,
                       AresConfig config)
    : id_(std::move(id)), core_(num_arms, context_dim, std::move(config)) {}

}  // namespace ares
