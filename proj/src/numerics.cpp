#include "ares/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace ares {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

SpdFactor::SpdFactor(const Matrix& source) : source_(source) {
  require_square(source, "SpdFactor");
  Eigen::LLT<Matrix> llt(source);
  if (llt.info() != Eigen::Success)
    throw DomainError("SpdFactor: matrix is not positive definite");
  lower_ = llt.matrixL();
}

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != lower_.rows()) throw DimensionError("SpdFactor::solve: size mismatch");
  Vector y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SpdFactor::inverse() const {
  const Eigen::Index n = lower_.rows();
  Matrix linv = lower_.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  return linv.transpose() * linv;
}

double SpdFactor::log_det() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

double spectral_radius(const Matrix& m) {
  require_square(m, "spectral_radius");
  require_finite(m, "spectral_radius");
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectral_radius: eigenvalue iteration failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix matrix_power(const Matrix& m, std::size_t exponent) {
  require_square(m, "matrix_power");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (exponent > 0) {
    if (exponent & 1U) result = result * base;
    exponent >>= 1U;
    if (exponent > 0) base = base * base;
  }
  return result;
}

Matrix riccati_map(const Matrix& gamma, const Matrix& c, const Matrix& q,
                   const Matrix& r, const Matrix& p) {
  const Matrix gp = gamma * p;
  const Matrix innovation = c * p * c.transpose() + r;
  Eigen::LDLT<Matrix> ldlt(innovation);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("riccati_map: innovation covariance is singular");
  const Matrix cross = gp * c.transpose();  // G P C'
  Matrix next = gp * gamma.transpose() + q - cross * ldlt.solve(cross.transpose());
  return symmetrized(next);
}

Matrix kalman_gain(const Matrix& p, const Matrix& c, const Matrix& r) {
  const Matrix innovation = c * p * c.transpose() + r;
  Eigen::LDLT<Matrix> ldlt(innovation);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14)
    throw NumericalError("kalman_gain: innovation covariance is singular");
  // K = P C' S^-1  <=>  K' = S^-1 C P  (S symmetric)
  return ldlt.solve(c * p).transpose();
}

RiccatiSolution solve_dare(const Matrix& gamma, const Matrix& c, const Matrix& q,
                           const Matrix& r) {
  require_square(gamma, "solve_dare(gamma)");
  require_square(q, "solve_dare(q)");
  require_square(r, "solve_dare(r)");
  const Eigen::Index d = gamma.rows();
  if (c.cols() != d || q.rows() != d || r.rows() != c.rows())
    throw DimensionError("solve_dare: inconsistent dimensions");
  require_finite(gamma, "solve_dare(gamma)");
  require_finite(c, "solve_dare(c)");
  require_finite(q, "solve_dare(q)");
  require_finite(r, "solve_dare(r)");

  RiccatiSolution out;
  Matrix p = symmetrized(q);
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= kRiccatiIterationCap; ++it) {
    Matrix next = riccati_map(gamma, c, q, r, p);
    step = (next - p).norm();
    p = std::move(next);
    // norm() squares entries, so it overflows long before the iterate does
    if (!p.allFinite() || !std::isfinite(step))
      throw DivergenceError("solve_dare: iterate became non-finite", step);
    if (step <= kRiccatiTolerance * std::max(1.0, p.stableNorm())) {
      out.iterations = it;
      break;
    }
  }
  if (out.iterations == 0)
    throw DivergenceError("solve_dare: no convergence within iteration cap", step);
  out.p = p;
  out.k = kalman_gain(p, c, r);
  out.residual = (riccati_map(gamma, c, q, r, p) - p).norm();
  return out;
}

Matrix solve_lyapunov(const Matrix& gamma, const Matrix& q) {
  require_square(gamma, "solve_lyapunov");
  if (spectral_radius(gamma) >= 1.0)
    throw DomainError("solve_lyapunov: state matrix is not strictly stable");
  // Smith doubling: Z_{k+1} = Z_k + A_k Z_k A_k',  A_{k+1} = A_k^2.
  Matrix z = q;
  Matrix a = gamma;
  for (int it = 0; it < 64; ++it) {
    Matrix inc = a * z * a.transpose();
    z += inc;
    a = a * a;
    if (inc.norm() <= 1e-15 * std::max(1.0, z.norm())) break;
  }
  return symmetrized(z);
}

GaussianSampler::GaussianSampler(Vector mean, const Matrix& cov) : mean_(std::move(mean)) {
  require_square(cov, "GaussianSampler");
  if (cov.rows() != mean_.size()) throw DimensionError("GaussianSampler: mean/cov size mismatch");
  require_finite(cov, "GaussianSampler");
  const Matrix sym = symmetrized(cov);
  if (sym.isZero(0.0)) {
    zero_ = true;
    root_ = Matrix::Zero(sym.rows(), sym.cols());
    return;
  }
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    root_ = llt.matrixL();
    return;
  }
  // Semidefinite: symmetric square root from the eigen-decomposition.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const double tol = 1e-10 * std::max(1.0, sym.norm());
  if (eig.eigenvalues().minCoeff() < -tol)
    throw DomainError("GaussianSampler: covariance is not positive semidefinite");
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  root_ = eig.eigenvectors() * roots.asDiagonal();
}

Vector GaussianSampler::draw(RandomStream& rng) const {
  Vector w = rng.gaussian_vector(mean_.size());
  if (zero_) return mean_;
  return mean_ + root_ * w;
}

Vector sample_gaussian(const Vector& mean, const Matrix& cov, RandomStream& rng) {
  return GaussianSampler(mean, cov).draw(rng);
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::size_t argmin(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

}  // namespace ares
