#pragma once

// Time-varying and steady-state Kalman predictors for the context stream,
// plus the Oracle selection rule built on them.

#include <cstddef>

#include "ares/environment.hpp"
#include "ares/numerics.hpp"

namespace ares {

struct KalmanState {
  Vector z_pred;  // z_{t|t-1}
  Matrix p_pred;  // P_{t|t-1}
  Matrix gain;    // K_t (d x m), from the most recent update
  Vector z_filt;  // z_{t|t}
  Matrix p_filt;  // P_{t|t}

  /// z_{0|-1} = 0, P_{0|-1} = Sigma0.
  static KalmanState initial(const EnvParams& params);
};

/// Measurement update with theta_t followed by the time update, i.e.
/// maps the prediction for round t to the prediction for round t + 1.
KalmanState kf_step(const EnvParams& params, const KalmanState& state, const Vector& theta);

struct SteadyKalman {
  Matrix gain;         // K = P C' (C P C' + R)^-1
  Matrix p;            // Riccati solution (prediction error covariance)
  Matrix closed_loop;  // Gamma - Gamma K C

  static SteadyKalman from(const EnvParams& params);

  /// Var(X_{a,t} - <c_a, z_hat_t>) = c_a' P c_a + sigma_eta^2.
  double innovation_variance(const EnvParams& params, std::size_t arm) const;
  double max_innovation_variance(const EnvParams& params) const;
};

/// z_hat_{t+1} = Gamma z_hat + mu + Gamma K (theta - C z_hat).
Vector steady_filter_step(const SteadyKalman& sk, const EnvParams& params, const Vector& z_hat,
                          const Vector& theta);

/// argmax_a <c_a, z_{t|t-1}>, lowest index on ties.
std::size_t oracle_select(const EnvParams& params, const KalmanState& state);

}  // namespace ares
