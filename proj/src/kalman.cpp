#include "ares/kalman.hpp"

#include <algorithm>

namespace ares {

KalmanState KalmanState::initial(const EnvParams& params) {
  const auto d = static_cast<Eigen::Index>(params.state_dim());
  const auto m = static_cast<Eigen::Index>(params.context_dim());
  KalmanState s;
  s.z_pred = Vector::Zero(d);
  s.p_pred = params.sigma0;
  s.gain = Matrix::Zero(d, m);
  s.z_filt = Vector::Zero(d);
  s.p_filt = params.sigma0;
  return s;
}

KalmanState kf_step(const EnvParams& params, const KalmanState& state, const Vector& theta) {
  const auto d = static_cast<Eigen::Index>(params.state_dim());
  if (state.z_pred.size() != d || state.p_pred.rows() != d ||
      theta.size() != params.c_theta.rows())
    throw DimensionError("kf_step: dimension mismatch");
  const Matrix& c = params.c_theta;

  KalmanState next;
  next.gain = kalman_gain(state.p_pred, c, params.r);
  next.z_filt = state.z_pred + next.gain * (theta - c * state.z_pred);
  next.p_filt = state.p_pred - next.gain * c * state.p_pred;
  next.p_filt = 0.5 * (next.p_filt + next.p_filt.transpose());
  next.z_pred = params.gamma * next.z_filt + params.mu;
  next.p_pred = params.gamma * next.p_filt * params.gamma.transpose() + params.q;
  next.p_pred = 0.5 * (next.p_pred + next.p_pred.transpose());
  return next;
}

SteadyKalman SteadyKalman::from(const EnvParams& params) {
  params.validate();
  const RiccatiSolution sol = solve_dare(params.gamma, params.c_theta, params.q, params.r);
  SteadyKalman sk;
  sk.p = sol.p;
  sk.gain = sol.k;
  sk.closed_loop = params.gamma - params.gamma * sk.gain * params.c_theta;
  return sk;
}

double SteadyKalman::innovation_variance(const EnvParams& params, std::size_t arm) const {
  const Vector& c = params.actions.at(arm);
  return c.dot(p * c) + params.sigma_eta * params.sigma_eta;
}

double SteadyKalman::max_innovation_variance(const EnvParams& params) const {
  double best = 0.0;
  for (std::size_t a = 0; a < params.num_arms(); ++a)
    best = std::max(best, innovation_variance(params, a));
  return best;
}

Vector steady_filter_step(const SteadyKalman& sk, const EnvParams& params, const Vector& z_hat,
                          const Vector& theta) {
  const Matrix gk = params.gamma * sk.gain;
  return params.gamma * z_hat + params.mu + gk * (theta - params.c_theta * z_hat);
}

std::size_t oracle_select(const EnvParams& params, const KalmanState& state) {
  return optimal_arm(params, state.z_pred);
}

}  // namespace ares
