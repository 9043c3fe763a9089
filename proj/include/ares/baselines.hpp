#pragma once

// Comparison policies: Oracle (Kalman predictor with the true system),
// UCB, sliding-window UCB, Rexp3, PIES and uniform random.

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ares/kalman.hpp"
#include "ares/policy.hpp"
#include "ares/regressor.hpp"

namespace ares {

// --- pure selection rules ---------------------------------------------------

/// argmax_a mean_a + sqrt(2 log(1/delta) / count_a); unplayed arms first.
std::size_t ucb_select(std::span<const double> means, std::span<const std::size_t> counts,
                       double delta);

/// Reward statistics restricted to the trailing `window` plays.
class SlidingWindowStats {
 public:
  SlidingWindowStats(std::size_t num_arms, std::size_t window);

  void push(std::size_t arm, double reward);
  std::size_t window() const { return window_; }
  std::size_t plays() const { return plays_; }
  std::size_t count(std::size_t arm) const { return counts_[arm]; }
  double mean(std::size_t arm) const;
  std::size_t num_arms() const { return counts_.size(); }

 private:
  std::size_t window_;
  std::size_t plays_ = 0;
  std::deque<std::pair<std::size_t, double>> recent_;
  std::vector<double> sums_;
  std::vector<std::size_t> counts_;
};

/// argmax_a mean_a + scale sqrt(log(min(t, window)) / count_a) over the
/// window statistics; arms absent from the window are played first.
std::size_t swucb_select(const SlidingWindowStats& stats, std::size_t t, double scale);

/// Exp3 sampling distribution (1 - gamma) w + gamma / k for normalized w.
std::vector<double> exp3_probabilities(std::span<const double> weights, double gamma);

/// Importance-weighted exponential update of the played arm; keeps the
/// weights normalized.
void exp3_update(std::vector<double>& weights, std::size_t arm, double reward01,
                 double probability, double gamma);

/// Default Rexp3 batch length ceil((k log k n^2)^{1/3}) clamped to [50, n].
std::size_t rexp3_default_batch(std::size_t num_arms, std::size_t horizon);
/// Default Rexp3 mixing min{1, sqrt(k log k / ((e - 1) batch))}.
double rexp3_default_gamma(std::size_t num_arms, std::size_t batch);

/// Round-robin for the first k s rounds, greedy on the predictions after.
std::size_t pies_step(std::size_t round, std::size_t window, std::size_t num_arms,
                      std::span<const double> predictions);

std::size_t random_select(std::size_t num_arms, RandomStream& rng);

// --- policies ---------------------------------------------------------------

class OraclePolicy final : public Policy {
 public:
  OraclePolicy(std::string id, const EnvParams& params);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override;
  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context) override;
  const SelectionInfo* selection_info() const override { return &info_; }

  const KalmanState& filter() const { return state_; }

 private:
  std::string id_;
  const EnvParams* params_;
  KalmanState state_;
  SelectionInfo info_;
};

class UcbPolicy final : public Policy {
 public:
  UcbPolicy(std::string id, std::size_t num_arms, double delta);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override;
  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context) override;

 private:
  std::string id_;
  double delta_;
  std::vector<double> means_;
  std::vector<std::size_t> counts_;
};

class SlidingWindowUcbPolicy final : public Policy {
 public:
  SlidingWindowUcbPolicy(std::string id, std::size_t num_arms, std::size_t window, double scale);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override;
  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context) override;

 private:
  std::string id_;
  SlidingWindowStats stats_;
  double scale_;
};

class Rexp3Policy final : public Policy {
 public:
  Rexp3Policy(std::string id, std::size_t num_arms, std::size_t batch, double gamma, double clip,
              std::uint64_t seed);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override;
  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context) override;

  const std::vector<double>& weights() const { return weights_; }
  std::size_t batch() const { return batch_; }
  double gamma() const { return gamma_; }

 private:
  std::string id_;
  std::size_t batch_;
  double gamma_;
  double clip_;
  RandomStream rng_;
  std::vector<double> weights_;
  std::vector<double> probabilities_;
};

class PiesPolicy final : public Policy {
 public:
  PiesPolicy(std::string id, std::size_t num_arms, std::size_t context_dim, std::size_t window,
             double lambda);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override;
  void observe(std::size_t round, std::size_t arm, double reward, const Vector& context) override;
  const SelectionInfo* selection_info() const override { return &info_; }

  std::size_t window() const { return window_; }
  const RegressorState& regressor(std::size_t arm) const { return regressors_.at(arm); }

 private:
  std::string id_;
  std::size_t window_;
  ContextWindow contexts_;
  std::vector<RegressorState> regressors_;
  SelectionInfo info_;
};

class RandomPolicy final : public Policy {
 public:
  RandomPolicy(std::string id, std::size_t num_arms, std::uint64_t seed);

  const std::string& id() const override { return id_; }
  std::size_t select(std::size_t round) override;
  void observe(std::size_t, std::size_t, double, const Vector&) override {}

 private:
  std::string id_;
  std::size_t num_arms_;
  RandomStream rng_;
};

}  // namespace ares
