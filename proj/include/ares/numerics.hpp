#pragma once

// Small dense linear-algebra kernel shared by the environment, the filters
// and the regressors. Dimensions here never exceed a few dozen.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ares {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a fixed-point iteration hits its cap. Carries the last
/// Frobenius step size so callers can report how far off it was.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Seeded random stream. One per simulation (or per policy); never shared
/// between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::size_t uniform_index(std::size_t k) {
    return std::uniform_int_distribution<std::size_t>(0, k - 1)(engine_);
  }
  Vector gaussian_vector(Eigen::Index n) {
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = gaussian();
    return w;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Cholesky factor of a symmetric positive definite matrix.
class SpdFactor {
 public:
  explicit SpdFactor(const Matrix& source);

  const Matrix& source() const { return source_; }
  const Matrix& lower() const { return lower_; }
  Vector solve(const Vector& b) const;
  Matrix inverse() const;
  double log_det() const;

 private:
  Matrix source_;
  Matrix lower_;
};

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& m);

/// Spectral (operator 2-) norm.
double spectral_norm(const Matrix& m);

/// Integer matrix power by repeated squaring.
Matrix matrix_power(const Matrix& m, std::size_t exponent);

/// One application of the filter covariance map
///   P -> G P G' + Q - G P C' (C P C' + R)^-1 C P G'.
Matrix riccati_map(const Matrix& gamma, const Matrix& c, const Matrix& q,
                   const Matrix& r, const Matrix& p);

struct RiccatiSolution {
  Matrix p;  // prediction error covariance (fixed point of riccati_map)
  Matrix k;  // P C' (C P C' + R)^-1
  std::size_t iterations = 0;
  double residual = 0.0;  // ||riccati_map(P) - P||_F
};

inline constexpr std::size_t kRiccatiIterationCap = 100000;
inline constexpr double kRiccatiTolerance = 1e-12;

/// Solves the discrete filter Riccati equation by fixed-point iteration of
/// riccati_map starting from Q. Throws DivergenceError past the cap.
RiccatiSolution solve_dare(const Matrix& gamma, const Matrix& c,
                           const Matrix& q, const Matrix& r);

/// Kalman gain P C' (C P C' + R)^-1 for a given covariance.
Matrix kalman_gain(const Matrix& p, const Matrix& c, const Matrix& r);

/// Stationary covariance Z = G Z G' + Q (doubling iteration). Requires
/// rho(G) < 1.
Matrix solve_lyapunov(const Matrix& gamma, const Matrix& q);

/// Draws mean + L w for a fixed PSD covariance; the square root L is
/// computed once at construction.
class GaussianSampler {
 public:
  GaussianSampler(Vector mean, const Matrix& cov);

  Vector draw(RandomStream& rng) const;
  const Matrix& root() const { return root_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix root_;
  bool zero_ = false;
};

Vector sample_gaussian(const Vector& mean, const Matrix& cov,
                       RandomStream& rng);

/// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

/// Index of the smallest value, lowest index on ties.
std::size_t argmin(std::span<const double> values);

void require_finite(const Matrix& m, const char* what);

}  // namespace ares
