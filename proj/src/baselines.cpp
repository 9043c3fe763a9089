#include "ares/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ares {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::size_t ucb_select(std::span<const double> means, std::span<const std::size_t> counts,
                       double delta) {
  if (means.size() != counts.size() || means.empty())
    throw DimensionError("ucb_select: means and counts must be non-empty and aligned");
  std::vector<double> index(means.size());
  const double log_term = 2.0 * std::log(1.0 / delta);
  for (std::size_t a = 0; a < means.size(); ++a)
    index[a] = counts[a] == 0 ? kInf
                              : means[a] + std::sqrt(log_term / static_cast<double>(counts[a]));
  return argmax(index);
}

SlidingWindowStats::SlidingWindowStats(std::size_t num_arms, std::size_t window)
    : window_(window), sums_(num_arms, 0.0), counts_(num_arms, 0) {
  if (window == 0) throw std::invalid_argument("SlidingWindowStats: window must be >= 1");
}

void SlidingWindowStats::push(std::size_t arm, double reward) {
  recent_.emplace_back(arm, reward);
  sums_.at(arm) += reward;
  ++counts_[arm];
  ++plays_;
  if (recent_.size() > window_) {
    const auto [old_arm, old_reward] = recent_.front();
    recent_.pop_front();
    --counts_[old_arm];
    // Recompute instead of subtracting so an emptied arm is exactly zero.
    if (counts_[old_arm] == 0)
      sums_[old_arm] = 0.0;
    else
      sums_[old_arm] -= old_reward;
  }
}

double SlidingWindowStats::mean(std::size_t arm) const {
  return counts_[arm] == 0 ? 0.0 : sums_[arm] / static_cast<double>(counts_[arm]);
}

std::size_t swucb_select(const SlidingWindowStats& stats, std::size_t t, double scale) {
  const std::size_t k = stats.num_arms();
  const double horizon_term =
      std::log(static_cast<double>(std::max<std::size_t>(1, std::min(t, stats.window()))));
  std::vector<double> index(k);
  for (std::size_t a = 0; a < k; ++a) {
    const std::size_t n = stats.count(a);
    index[a] = n == 0 ? kInf
                      : stats.mean(a) + scale * std::sqrt(horizon_term / static_cast<double>(n));
  }
  return argmax(index);
}

std::vector<double> exp3_probabilities(std::span<const double> weights, double gamma) {
  const double k = static_cast<double>(weights.size());
  std::vector<double> p(weights.size());
  for (std::size_t a = 0; a < weights.size(); ++a) p[a] = (1.0 - gamma) * weights[a] + gamma / k;
  return p;
}

void exp3_update(std::vector<double>& weights, std::size_t arm, double reward01,
                 double probability, double gamma) {
  const double k = static_cast<double>(weights.size());
  const double estimate = reward01 / probability;
  weights.at(arm) *= std::exp(gamma * estimate / k);
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
}

std::size_t rexp3_default_batch(std::size_t num_arms, std::size_t horizon) {
  const double k = static_cast<double>(num_arms);
  const double n = static_cast<double>(horizon);
  const double raw = std::ceil(std::cbrt(k * std::log(k) * n * n));
  const std::size_t upper = std::max<std::size_t>(horizon, 1);
  const std::size_t lower = std::min<std::size_t>(50, upper);
  return std::clamp(static_cast<std::size_t>(std::max(raw, 0.0)), lower, upper);
}

double rexp3_default_gamma(std::size_t num_arms, std::size_t batch) {
  const double k = static_cast<double>(num_arms);
  return std::min(1.0, std::sqrt(k * std::log(k) /
                                 ((std::numbers::e - 1.0) * static_cast<double>(batch))));
}

std::size_t pies_step(std::size_t round, std::size_t window, std::size_t num_arms,
                      std::span<const double> predictions) {
  if (round < num_arms * window) return round % num_arms;
  return argmax(predictions);
}

std::size_t random_select(std::size_t num_arms, RandomStream& rng) {
  return rng.uniform_index(num_arms);
}

// --- Oracle -----------------------------------------------------------------

OraclePolicy::OraclePolicy(std::string id, const EnvParams& params)
    : id_(std::move(id)), params_(&params), state_(KalmanState::initial(params)) {
  info_.prediction.assign(params.num_arms(), std::nullopt);
}

std::size_t OraclePolicy::select(std::size_t) {
  for (std::size_t a = 0; a < params_->num_arms(); ++a)
    info_.prediction[a] = params_->actions[a].dot(state_.z_pred);
  return oracle_select(*params_, state_);
}

void OraclePolicy::observe(std::size_t, std::size_t, double, const Vector& context) {
  state_ = kf_step(*params_, state_, context);
}

// --- UCB --------------------------------------------------------------------

UcbPolicy::UcbPolicy(std::string id, std::size_t num_arms, double delta)
    : id_(std::move(id)), delta_(delta), means_(num_arms, 0.0), counts_(num_arms, 0) {}

std::size_t UcbPolicy::select(std::size_t) { return ucb_select(means_, counts_, delta_); }

void UcbPolicy::observe(std::size_t, std::size_t arm, double reward, const Vector&) {
  ++counts_.at(arm);
  means_[arm] += (reward - means_[arm]) / static_cast<double>(counts_[arm]);
}

// --- SW-UCB -----------------------------------------------------------------

SlidingWindowUcbPolicy::SlidingWindowUcbPolicy(std::string id, std::size_t num_arms,
                                               std::size_t window, double scale)
    : id_(std::move(id)), stats_(num_arms, window), scale_(scale) {}

std::size_t SlidingWindowUcbPolicy::select(std::size_t) {
  return swucb_select(stats_, stats_.plays(), scale_);
}

void SlidingWindowUcbPolicy::observe(std::size_t, std::size_t arm, double reward, const Vector&) {
  stats_.push(arm, reward);
}

// --- Rexp3 ------------------------------------------------------------------

Rexp3Policy::Rexp3Policy(std::string id, std::size_t num_arms, std::size_t batch, double gamma,
                         double clip, std::uint64_t seed)
    : id_(std::move(id)),
      batch_(batch),
      gamma_(gamma),
      clip_(clip),
      rng_(seed),
      weights_(num_arms, 1.0 / static_cast<double>(num_arms)) {
  if (batch == 0) throw std::invalid_argument("Rexp3: batch length must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("Rexp3: gamma must be in [0,1]");
  if (!(clip > 0.0)) throw std::invalid_argument("Rexp3: clip must be positive");
}

std::size_t Rexp3Policy::select(std::size_t round) {
  if (round > 0 && round % batch_ == 0)
    std::fill(weights_.begin(), weights_.end(), 1.0 / static_cast<double>(weights_.size()));
  probabilities_ = exp3_probabilities(weights_, gamma_);
  const double u = rng_.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < probabilities_.size(); ++a) {
    acc += probabilities_[a];
    if (u < acc) return a;
  }
  return probabilities_.size() - 1;
}

void Rexp3Policy::observe(std::size_t, std::size_t arm, double reward, const Vector&) {
  const double scaled = std::clamp((reward + clip_) / (2.0 * clip_), 0.0, 1.0);
  exp3_update(weights_, arm, scaled, probabilities_.at(arm), gamma_);
}

// --- PIES -------------------------------------------------------------------

PiesPolicy::PiesPolicy(std::string id, std::size_t num_arms, std::size_t context_dim,
                       std::size_t window, double lambda)
    : id_(std::move(id)), window_(window), contexts_(window, context_dim) {
  regressors_.reserve(num_arms);
  for (std::size_t a = 0; a < num_arms; ++a) regressors_.emplace_back(window, context_dim, lambda);
  info_.prediction.assign(num_arms, std::nullopt);
}

std::size_t PiesPolicy::select(std::size_t round) {
  const std::size_t k = regressors_.size();
  std::vector<double> predictions(k, 0.0);
  const auto theta = contexts_.theta(window_);
  for (std::size_t a = 0; a < k; ++a) {
    info_.prediction[a].reset();
    if (theta) {
      predictions[a] = regressors_[a].predict(*theta);
      info_.prediction[a] = predictions[a];
    }
  }
  return pies_step(round, window_, k, predictions);
}

void PiesPolicy::observe(std::size_t, std::size_t arm, double reward, const Vector& context) {
  if (auto theta = contexts_.theta(window_)) regressors_.at(arm).update(*theta, reward);
  contexts_.push(context);
}

// --- Random -----------------------------------------------------------------

RandomPolicy::RandomPolicy(std::string id, std::size_t num_arms, std::uint64_t seed)
    : id_(std::move(id)), num_arms_(num_arms), rng_(seed) {
  if (num_arms == 0) throw std::invalid_argument("RandomPolicy: need at least one arm");
}

std::size_t RandomPolicy::select(std::size_t) { return random_select(num_arms_, rng_); }

}  // namespace ares
