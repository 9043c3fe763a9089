#include "ares/regressor.hpp"

#include <algorithm>
#include <string>

namespace ares {

void BoundParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(std::string("BoundParams: ") + name + " must be positive");
  };
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("BoundParams: delta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("BoundParams: alpha must lie in (0, 1)");
  if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("BoundParams: nu must lie in [0, 1]");
  positive(lambda, "lambda");
  positive(b_r, "b_r");
  positive(b_g, "b_g");
  positive(b_c, "b_c");
  positive(c_tilde, "c_tilde");
  positive(k_subg, "k_subg");
}

// --- ContextWindow ----------------------------------------------------------

ContextWindow::ContextWindow(std::size_t capacity, std::size_t context_dim)
    : capacity_(capacity), context_dim_(context_dim) {
  if (context_dim == 0) throw DimensionError("ContextWindow: context dimension must be positive");
}

void ContextWindow::push(const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != context_dim_)
    throw DimensionError("ContextWindow::push: context has wrong dimension");
  if (capacity_ == 0) return;
  if (history_.size() == capacity_) history_.pop_front();
  history_.push_back(theta);
}

std::optional<Vector> ContextWindow::theta(std::size_t s) const {
  if (s > history_.size()) return std::nullopt;
  const auto m = static_cast<Eigen::Index>(context_dim_);
  Vector out(static_cast<Eigen::Index>(s) * m + 1);
  const std::size_t first = history_.size() - s;
  for (std::size_t j = 0; j < s; ++j)
    out.segment(static_cast<Eigen::Index>(j) * m, m) = history_[first + j];
  out(out.size() - 1) = 1.0;
  return out;
}

std::optional<Vector> build_theta(const ContextWindow& window, std::size_t s) {
  return window.theta(s);
}

// --- RegressorState ---------------------------------------------------------

RegressorState::RegressorState(std::size_t window, std::size_t context_dim, double lambda)
    : window_(window), lambda_(lambda) {
  if (!(lambda > 0.0)) throw DomainError("RegressorState: lambda must be positive");
  const auto n = static_cast<Eigen::Index>(window * context_dim + 1);
  v_ = lambda * Matrix::Identity(n, n);
  v_inv_ = (1.0 / lambda) * Matrix::Identity(n, n);
  xo_ = Vector::Zero(n);
  g_hat_ = Vector::Zero(n);
  logdet_v_ = static_cast<double>(n) * std::log(lambda);
}

void RegressorState::check_theta(const Vector& theta) const {
  if (theta.size() != v_.rows())
    throw DimensionError("RegressorState: regressor has length " + std::to_string(theta.size()) +
                         ", expected " + std::to_string(v_.rows()));
}

void RegressorState::update(const Vector& theta, double reward) {
  check_theta(theta);
  if (!theta.allFinite() || !std::isfinite(reward))
    throw DomainError("RegressorState::update: non-finite sample");
  const Vector vinv_theta = v_inv_ * theta;
  const double q = theta.dot(vinv_theta);
  v_.noalias() += theta * theta.transpose();
  v_inv_.noalias() -= (vinv_theta * vinv_theta.transpose()) / (1.0 + q);
  logdet_v_ += std::log1p(q);
  xo_.noalias() += reward * theta;
  ++n_obs_;
  if (n_obs_ % kRevalidateEvery == 0) revalidate();
  g_hat_.noalias() = v_inv_ * xo_;
}

void RegressorState::revalidate() {
  const SpdFactor factor(v_);
  v_inv_ = factor.inverse();
  logdet_v_ = factor.log_det();
  g_hat_.noalias() = v_inv_ * xo_;
}

double RegressorState::predict(const Vector& theta) const {
  check_theta(theta);
  return g_hat_.dot(theta);
}

double RegressorState::quad_form(const Vector& theta) const {
  check_theta(theta);
  return std::max(0.0, theta.dot(v_inv_ * theta));
}

double RegressorState::bound_e(const BoundParams& bp) const {
  const double n = static_cast<double>(dim());
  const double log_ratio = 0.5 * logdet_v_ - 0.5 * n * std::log(lambda_);
  const double radicand = 2.0 * bp.b_r * bp.b_r * (std::log(1.0 / bp.delta) + log_ratio);
  if (radicand < 0.0) throw NumericalError("bound_e: negative radicand");
  return std::sqrt(radicand) + lambda_ * bp.b_g * std::sqrt(std::max(0.0, v_inv_.trace()));
}

double bias_confidence_term(std::size_t n_obs, double g_value, double b_beta,
                            double trace_term) {
  return std::sqrt(static_cast<double>(n_obs) * g_value) * b_beta *
         std::sqrt(std::max(0.0, trace_term));
}

double RegressorState::bound_b(const BoundParams& bp, double b_beta,
                               const Matrix& state_cov) const {
  const double e = bound_e(bp);
  if (n_obs_ == 0) return e;
  const double g = g_sigma(state_cov, bp.delta / static_cast<double>(n_obs_), bp);
  const double trace_term = static_cast<double>(dim()) - lambda_ * v_inv_.trace();
  return e + bias_confidence_term(n_obs_, g, b_beta, trace_term);
}

double RegressorState::update_window_cost(const Vector& theta, double reward,
                                          const BoundParams& bp) {
  const double residual = std::abs(reward - predict(theta));
  zeta_ = bp.alpha * zeta_ + (1.0 - bp.alpha) * residual;
  j_hat_ = zeta_ + bp.nu * bound_e(bp) * std::sqrt(quad_form(theta));
  return residual;
}

void RegressorState::refresh_cost(const Vector& theta, const BoundParams& bp) {
  j_hat_ = zeta_ + bp.nu * bound_e(bp) * std::sqrt(quad_form(theta));
}

// --- tail function ----------------------------------------------------------

double g_sigma(const Matrix& cov, double delta, const BoundParams& bp) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("g_sigma: delta must lie in (0, 1)");
  if (cov.rows() != cov.cols()) throw DimensionError("g_sigma: covariance must be square");
  const double log_term = std::log(2.0 / delta);
  const double k2 = bp.k_subg * bp.k_subg;
  const double hs = cov.norm();
  const double op = spectral_norm(cov);
  const double first = std::sqrt(k2 * k2 * hs * hs * log_term / bp.c_tilde);
  const double second = k2 * op * log_term / bp.c_tilde;
  return cov.trace() + std::max(first, second);
}

// --- instrumented -----------------------------------------------------------

Vector true_g(const EnvParams& params, const SteadyKalman& sk, std::size_t arm, std::size_t s) {
  const Vector& c = params.actions.at(arm);
  const auto m = static_cast<Eigen::Index>(params.context_dim());
  const Matrix gk = params.gamma * sk.gain;  // d x m
  Vector g(static_cast<Eigen::Index>(s) * m + 1);
  // Block j (0-based, oldest first) multiplies theta_{t-s+j}: c' A^{s-1-j} Gamma K.
  Matrix power = Matrix::Identity(sk.closed_loop.rows(), sk.closed_loop.cols());
  for (std::size_t back = 0; back < s; ++back) {
    const std::size_t block = s - 1 - back;
    g.segment(static_cast<Eigen::Index>(block) * m, m) = (c.transpose() * power * gk).transpose();
    power = sk.closed_loop * power;
  }
  double drift = 0.0;
  Vector a_mu = params.mu;
  for (std::size_t tau = 1; tau <= s; ++tau) {
    a_mu = sk.closed_loop * a_mu;
    drift += c.dot(a_mu);
  }
  g(g.size() - 1) = drift;
  return g;
}

double bias_bound(const SteadyKalman& sk, double b_c, std::size_t s) {
  return b_c * spectral_norm(matrix_power(sk.closed_loop, s));
}

BiasTracker::BiasTracker(const EnvParams& params, const SteadyKalman& sk,
                         std::size_t max_window)
    : params_(&params), sk_(&sk), max_window_(max_window) {
  history_.push_back(Vector::Zero(static_cast<Eigen::Index>(params.state_dim())));
  powers_.reserve(max_window + 1);
  powers_.push_back(Matrix::Identity(sk.closed_loop.rows(), sk.closed_loop.cols()));
  for (std::size_t s = 1; s <= max_window; ++s) powers_.push_back(sk.closed_loop * powers_.back());
}

std::optional<double> BiasTracker::beta(std::size_t arm, std::size_t s) const {
  if (s > max_window_ || s > rounds_) return std::nullopt;
  const Vector& lagged = history_[history_.size() - 1 - s];
  return params_->actions.at(arm).dot(powers_[s] * lagged);
}

double BiasTracker::innovation(std::size_t arm, double reward) const {
  return reward - params_->actions.at(arm).dot(current());
}

void BiasTracker::push(const Vector& theta) {
  history_.push_back(steady_filter_step(*sk_, *params_, history_.back(), theta));
  if (history_.size() > max_window_ + 1) history_.pop_front();
  ++rounds_;
}

}  // namespace ares
