#pragma once

// Windowed linear reward predictor for one (arm, window size) pair.
//
// The reward is regressed on the stacked context history
//   Theta_t(s) = [theta_{t-s}' ... theta_{t-1}' 1]'
// with ridge-regularized least squares. The Gram matrix, its inverse, the
// log-determinant and the estimate are maintained incrementally.

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "ares/environment.hpp"
#include "ares/kalman.hpp"
#include "ares/numerics.hpp"

namespace ares {

struct BoundParams {
  double delta = 0.1;
  double lambda = 1.0;
  double b_r = 1.0;
  double b_g = 100.0;
  double b_c = 1.0;
  double nu = 0.1;
  double alpha = 0.99;
  double c_tilde = 1.0;
  double k_subg = 1.0 / std::sqrt(2.0 * std::log(2.0));

  void validate() const;
};

/// Ring buffer of the most recent contexts, oldest first.
class ContextWindow {
 public:
  ContextWindow(std::size_t capacity, std::size_t context_dim);

  void push(const Vector& theta);
  std::size_t size() const { return history_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t context_dim() const { return context_dim_; }

  /// Theta(s) built from the s newest contexts, or nullopt when fewer than s
  /// are buffered.
  std::optional<Vector> theta(std::size_t s) const;

 private:
  std::size_t capacity_;
  std::size_t context_dim_;
  std::deque<Vector> history_;
};

std::optional<Vector> build_theta(const ContextWindow& window, std::size_t s);

class RegressorState {
 public:
  static constexpr std::size_t kRevalidateEvery = 1000;

  RegressorState(std::size_t window, std::size_t context_dim, double lambda);

  std::size_t window() const { return window_; }
  std::size_t dim() const { return static_cast<std::size_t>(v_.rows()); }
  double lambda() const { return lambda_; }

  const Matrix& gram() const { return v_; }
  const Matrix& gram_inverse() const { return v_inv_; }
  const Vector& accumulator() const { return xo_; }
  const Vector& estimate() const { return g_hat_; }
  double log_det() const { return logdet_v_; }
  std::size_t count() const { return n_obs_; }
  double zeta() const { return zeta_; }
  double cost() const { return j_hat_; }

  /// Rank-one update with one (Theta, X) sample.
  void update(const Vector& theta, double reward);

  double predict(const Vector& theta) const;

  /// Theta' V^-1 Theta.
  double quad_form(const Vector& theta) const;

  /// Noise-only confidence radius
  ///   sqrt(2 B_R^2 log(det(V)^{1/2} / (delta det(lambda I)^{1/2})))
  ///     + lambda B_G sqrt(tr V^-1).
  double bound_e(const BoundParams& bp) const;

  /// bound_e plus the bias term sqrt(N g(delta/N)) B_beta sqrt(tr(I - lambda V^-1)).
  double bound_b(const BoundParams& bp, double b_beta, const Matrix& state_cov) const;

  /// Smoothed window cost. Must be called with the sample *before* update():
  ///   zeta <- alpha zeta + (1 - alpha) |X - G' Theta|
  ///   J    <- zeta + nu e sqrt(Theta' V^-1 Theta)
  /// Returns the absolute residual.
  double update_window_cost(const Vector& theta, double reward, const BoundParams& bp);

  /// Recomputes J with the current zeta, e and V for a new Theta.
  void refresh_cost(const Vector& theta, const BoundParams& bp);

  /// Recomputes V^-1 and log det V from a Cholesky factorization of V.
  void revalidate();

 private:
  void check_theta(const Vector& theta) const;

  std::size_t window_;
  double lambda_;
  Matrix v_;
  Matrix v_inv_;
  Vector xo_;
  Vector g_hat_;
  double logdet_v_;
  std::size_t n_obs_ = 0;
  double zeta_ = 0.0;
  double j_hat_ = 0.0;
};

/// Hanson-Wright style tail level for x' x, x ~ N(0, cov):
///   tr(S) + max{ sqrt(K^4 ||S||_F^2 log(2/delta) / c), K^2 ||S||_2 log(2/delta) / c }.
double g_sigma(const Matrix& cov, double delta, const BoundParams& bp);

/// sqrt(n g) * b_beta * sqrt(trace_term); the bias contribution to bound_b.
double bias_confidence_term(std::size_t n_obs, double g_value, double b_beta, double trace_term);

// ---------------------------------------------------------------------------
// Instrumented helpers. These need the true system and are only used by
// diagnostics, tests and the bias-aware perturbation variant.

struct OracleDiagnostics {
  Vector g_true;
  double beta = 0.0;
  double eps = 0.0;
  double b_beta = 0.0;
};

/// Stacks c_a' A^{s-1} Gamma K, ..., c_a' Gamma K and then
/// sum_{tau=1..s} <c_a, A^tau mu>, with A = Gamma - Gamma K C.
Vector true_g(const EnvParams& params, const SteadyKalman& sk, std::size_t arm, std::size_t s);

/// B_c ||A^s||_2.
double bias_bound(const SteadyKalman& sk, double b_c, std::size_t s);

/// Runs the steady-state predictor over the context stream and keeps the
/// last few predictor states, so that the truncation bias
///   beta_a^t(s) = <c_a, A^s z_hat_{t-s}>
/// can be read off for any s up to the capacity.
class BiasTracker {
 public:
  BiasTracker(const EnvParams& params, const SteadyKalman& sk, std::size_t max_window);

  /// z_hat_t for the current round (before its context is seen).
  const Vector& current() const { return history_.back(); }
  std::size_t rounds_seen() const { return rounds_; }

  /// Returns nullopt while fewer than s contexts have been pushed.
  std::optional<double> beta(std::size_t arm, std::size_t s) const;
  /// X - <c_a, z_hat_t> for the current round.
  double innovation(std::size_t arm, double reward) const;

  void push(const Vector& theta);

 private:
  const EnvParams* params_;
  const SteadyKalman* sk_;
  std::size_t max_window_;
  std::size_t rounds_ = 0;
  std::deque<Vector> history_;  // z_hat_{t-max_window} ... z_hat_t
  std::vector<Matrix> powers_;  // A^0 ... A^max_window
};

}  // namespace ares
