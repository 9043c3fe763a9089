#pragma once

// Adaptive Recursive least-squares Exploration of System.
//
// Every arm keeps one regressor per window size s in {0, ..., s_N}. Each
// round:
//   1. s_a = argmin_s J_a(s) per arm, shared s = max_a s_a;
//   2. u_a = e_a(delta, s) sqrt(Theta(s)' V_a(s)^-1 Theta(s)) with the
//      shared s, and the arm maximizing G_a(s_a)' Theta(s_a) + u_a is pulled;
//   3. every regressor of the pulled arm with enough history first updates
//      its smoothed cost with the pre-update residual, then absorbs the sample.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ares/policy.hpp"
#include "ares/regressor.hpp"

namespace ares {

enum class PerturbationKind {
  noise_only,  // u from bound_e
  with_bias,   // u from bound_b; needs a BiasModel of the true system
};

struct AresConfig {
  BoundParams bounds;
  std::size_t max_window = 10;
  bool refresh_all_penalties = false;
  PerturbationKind perturbation = PerturbationKind::noise_only;
  std::optional<BiasModel> bias_model;
};

struct WindowChoice {
  std::vector<std::size_t> per_arm;
  std::size_t shared = 0;
};

/// costs[a][s]; argmin per arm with ties to the smallest s, shared = max.
WindowChoice select_windows(const std::vector<std::vector<double>>& costs);

/// sqrt(2 log(1/delta) / pulls); +infinity when pulls == 0.
double warmup_bonus(double delta, std::size_t pulls);

class Ares {
 public:
  Ares(std::size_t num_arms, std::size_t context_dim, AresConfig config);

  std::size_t num_arms() const { return m_count_.size(); }
  std::size_t max_window() const { return config_.max_window; }
  const AresConfig& config() const { return config_; }

  WindowChoice select_windows() const;

  /// u_a for the given round, using the shared window for the confidence
  /// width when the arm is past warm-up.
  double perturbation(std::size_t arm, std::size_t round, const WindowChoice& windows) const;

  /// Picks the arm for this round and remembers the per-arm s_a / u_a.
  std::size_t select_action(std::size_t round);

  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context);

  const RegressorState& regressor(std::size_t arm, std::size_t s) const {
    return regressors_.at(arm).at(s);
  }
  const ContextWindow& contexts() const { return window_; }
  std::size_t warmup_pulls(std::size_t arm) const { return m_count_.at(arm); }
  std::size_t steady_pulls(std::size_t arm) const { return n_count_.at(arm); }
  const std::vector<std::size_t>& pull_rounds(std::size_t arm) const {
    return pull_rounds_.at(arm);
  }
  std::size_t chosen_window(std::size_t arm) const { return chosen_s_.at(arm); }
  std::size_t shared_window() const { return s_shared_; }
  const std::vector<double>& last_perturbation() const { return last_u_; }
  const std::vector<double>& last_scores() const { return last_score_; }
  const SelectionInfo& selection_info() const { return info_; }

 private:
  double warm_mean(std::size_t arm) const;
  bool past_warmup(std::size_t arm, std::size_t round) const;

  AresConfig config_;
  std::vector<std::vector<RegressorState>> regressors_;  // [arm][s]
  ContextWindow window_;
  std::vector<std::size_t> m_count_;
  std::vector<std::size_t> n_count_;
  std::vector<std::vector<std::size_t>> pull_rounds_;
  std::vector<double> reward_sum_;
  std::vector<std::size_t> chosen_s_;
  std::size_t s_shared_ = 0;
  std::vector<double> last_u_;
  std::vector<double> last_score_;
  SelectionInfo info_;
};

class AresPolicy final : public Policy {
 public:
  AresPolicy(std::string id, std::size_t num_arms, std::size_t context_dim, AresConfig config);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override { return core_.select_action(round); }
  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context) override {
    core_.observe(round, arm, reward, context);
  }
  const SelectionInfo* selection_info() const override { return &core_.selection_info(); }

  const Ares& core() const { return core_; }

 private:
  std::string id_;
  Ares core_;
};

}  // namespace ares
