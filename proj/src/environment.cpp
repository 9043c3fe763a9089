#include "ares/environment.hpp"

#include <cmath>
#include <string>

namespace ares {

void EnvParams::validate() const {
  const Eigen::Index d = gamma.rows();
  const Eigen::Index m = c_theta.rows();
  if (d == 0 || gamma.cols() != d) throw DimensionError("EnvParams: gamma must be square");
  if (m == 0 || c_theta.cols() != d) throw DimensionError("EnvParams: c_theta must be m x d");
  if (q.rows() != d || q.cols() != d) throw DimensionError("EnvParams: q must be d x d");
  if (r.rows() != m || r.cols() != m) throw DimensionError("EnvParams: r must be m x m");
  if (mu.size() != d) throw DimensionError("EnvParams: mu must have length d");
  if (sigma0.rows() != d || sigma0.cols() != d)
    throw DimensionError("EnvParams: sigma0 must be d x d");
  if (actions.empty()) throw DimensionError("EnvParams: at least one action is required");
  for (const auto& c : actions)
    if (c.size() != d) throw DimensionError("EnvParams: action vectors must have length d");
  for (const Matrix* mat : {&gamma, &c_theta, &q, &r, &sigma0}) require_finite(*mat, "EnvParams");
  if (!mu.allFinite()) throw DomainError("EnvParams: mu has non-finite entries");
  if (!(sigma_eta >= 0.0) || !std::isfinite(sigma_eta))
    throw DomainError("EnvParams: sigma_eta must be non-negative");
}

void EnvParams::check_assumptions(double action_norm_bound) const {
  validate();
  if (spectral_radius(gamma) > 1.0 + 1e-12)
    throw DomainError("EnvParams: state matrix is not marginally stable");
  for (const auto& c : actions)
    if (c.norm() > action_norm_bound + 1e-12)
      throw DomainError("EnvParams: action norm exceeds bound " + std::to_string(action_norm_bound));
  if (!(sigma_eta > 0.0)) throw DomainError("EnvParams: sigma_eta must be positive");
}

Matrix psi_generator(double psi, std::size_t dim) {
  if (!(psi > 0.0) || !std::isfinite(psi)) throw DomainError("make_psi_system: psi must be > 0");
  if (dim < 2) throw DimensionError("make_psi_system: dimension must be at least 2");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double mag = std::exp2(-psi * static_cast<double>(std::abs(i - j)));
      t(i, j) = i < j ? mag : -mag;
    }
  }
  return t;
}

EnvParams make_psi_system(double psi, std::size_t dim) {
  const Matrix t = psi_generator(psi, dim);
  const auto n = static_cast<Eigen::Index>(dim);
  EnvParams p;
  p.gamma = (0.99 / spectral_radius(t)) * t;
  p.c_theta = Matrix::Zero(1, n);
  p.c_theta(0, 0) = 1.0;
  p.q = Matrix::Identity(n, n);
  p.r = Matrix::Identity(1, 1);
  p.mu = Vector::Zero(n);
  p.sigma0 = Matrix::Identity(n, n);
  p.sigma_eta = 1.0;
  p.actions = {Vector::Unit(n, n - 2), Vector::Unit(n, n - 1)};
  return p;
}

std::size_t optimal_arm(const EnvParams& params, const Vector& z) {
  std::size_t best = 0;
  double best_value = params.actions[0].dot(z);
  for (std::size_t a = 1; a < params.actions.size(); ++a) {
    const double v = params.actions[a].dot(z);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

Simulator::Simulator(EnvParams params)
    : params_((params.validate(), std::move(params))),
      initial_(Vector::Zero(params_.gamma.rows()), params_.sigma0),
      process_(params_.mu, params_.q),
      context_noise_(Vector::Zero(params_.c_theta.rows()), params_.r) {}

EnvState Simulator::initial_state(RandomStream& rng) const {
  return EnvState{initial_.draw(rng), 0};
}

void Simulator::advance(EnvState& state, RandomStream& rng) const {
  state.z = params_.gamma * state.z + process_.draw(rng);
  ++state.round;
}

EnvState Simulator::burn_in(std::size_t rounds, RandomStream& rng) const {
  EnvState state = initial_state(rng);
  for (std::size_t i = 0; i < rounds; ++i) advance(state, rng);
  state.round = 0;
  return state;
}

RoundOutcome Simulator::step(EnvState& state, RandomStream& rng) const {
  const std::size_t k = params_.num_arms();
  RoundOutcome out;
  out.state = state.z;
  out.context = params_.c_theta * state.z + context_noise_.draw(rng);
  out.mean_rewards.resize(static_cast<Eigen::Index>(k));
  out.rewards.resize(static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    out.mean_rewards(i) = params_.actions[a].dot(state.z);
    out.rewards(i) = out.mean_rewards(i) + params_.sigma_eta * rng.gaussian();
  }
  out.optimal_arm = optimal_arm(params_, state.z);
  out.optimal_reward = out.rewards(static_cast<Eigen::Index>(out.optimal_arm));
  advance(state, rng);
  return out;
}

EnvState burn_in(const EnvParams& params, std::size_t rounds, RandomStream& rng) {
  return Simulator(params).burn_in(rounds, rng);
}

std::pair<EnvState, RoundOutcome> step(const EnvParams& params, const EnvState& state,
                                       RandomStream& rng) {
  EnvState next = state;
  RoundOutcome out = Simulator(params).step(next, rng);
  return {std::move(next), std::move(out)};
}

}  // namespace ares
