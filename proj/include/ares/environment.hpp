#pragma once

// Linear Gaussian dynamical system that generates contexts and rewards:
//
//   z_{t+1} = Gamma z_t + xi_t,      xi_t  ~ N(mu, Q),  z_0 ~ N(0, Sigma0)
//   theta_t = C z_t + phi_t,         phi_t ~ N(0, R)
//   X_{a,t} = <c_a, z_t> + eta_{a,t}, eta  ~ N(0, sigma_eta^2), one per arm

#include <cstddef>
#include <utility>
#include <vector>

#include "ares/numerics.hpp"

namespace ares {

struct EnvParams {
  Matrix gamma;    // d x d
  Matrix c_theta;  // m x d
  Matrix q;        // d x d, PSD
  Matrix r;        // m x m, SPD
  Vector mu;       // d
  Matrix sigma0;   // d x d, PSD
  double sigma_eta = 1.0;
  std::vector<Vector> actions;  // k vectors in R^d

  std::size_t state_dim() const { return static_cast<std::size_t>(gamma.rows()); }
  std::size_t context_dim() const { return static_cast<std::size_t>(c_theta.rows()); }
  std::size_t num_arms() const { return actions.size(); }

  /// Checks shapes and finiteness; throws DimensionError / DomainError.
  /// Stability (rho <= 1) and the action-norm bound are checked separately
  /// by check_assumptions since tests deliberately build degenerate systems.
  void validate() const;
  void check_assumptions(double action_norm_bound) const;
};

struct EnvState {
  Vector z;
  std::size_t round = 0;
};

struct RoundOutcome {
  Vector context;        // theta_t
  Vector rewards;        // realized X_{a,t} for every arm
  Vector mean_rewards;   // <c_a, z_t>
  Vector state;          // z_t, kept for instrumented diagnostics
  std::size_t optimal_arm = 0;
  double optimal_reward = 0.0;  // rewards[optimal_arm]
};

/// Five-dimensional test family parameterized by psi:
///   T[i,j] = 2^{-psi|i-j|} for i < j, -2^{-psi|i-j|} otherwise,
///   Gamma = (0.99 / rho(T)) T, C = e_1', Q = I, R = 1, sigma_eta = 1,
///   mu = 0, Sigma0 = I, actions = {e_{d-1}, e_d}.
EnvParams make_psi_system(double psi, std::size_t dim = 5);

/// The un-normalized T matrix of make_psi_system.
Matrix psi_generator(double psi, std::size_t dim);

/// Holds the noise square roots for a fixed parameter set. Every step draws
/// the same number of normals (m + k + d) regardless of the values, so two
/// simulators fed identically seeded streams stay in lockstep.
class Simulator {
 public:
  explicit Simulator(EnvParams params);

  const EnvParams& params() const { return params_; }

  EnvState initial_state(RandomStream& rng) const;
  EnvState burn_in(std::size_t rounds, RandomStream& rng) const;
  /// Emits the outcome for the current state, then advances it in place.
  RoundOutcome step(EnvState& state, RandomStream& rng) const;
  void advance(EnvState& state, RandomStream& rng) const;

 private:
  EnvParams params_;
  GaussianSampler initial_;
  GaussianSampler process_;
  GaussianSampler context_noise_;
};

EnvState burn_in(const EnvParams& params, std::size_t rounds, RandomStream& rng);
std::pair<EnvState, RoundOutcome> step(const EnvParams& params, const EnvState& state,
                                       RandomStream& rng);

/// a* = argmax_a <c_a, z>, lowest index on ties.
std::size_t optimal_arm(const EnvParams& params, const Vector& z);

}  // namespace ares
