#pragma once

// Reference computations used as oracles by the tests. Written directly
// from the definitions, without going through the library's incremental
// machinery.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ares/numerics.hpp"

namespace testing_support {

using ares::Matrix;
using ares::Vector;

// Ridge solution (lambda I + sum t t')^-1 sum x t from scratch.
struct BatchLs {
  Matrix v;
  Vector xo;
  Vector g;
  double log_det = 0.0;
};

inline BatchLs batch_ls(const std::vector<Vector>& thetas, const std::vector<double>& rewards,
                        double lambda, Eigen::Index dim) {
  BatchLs out;
  out.v = lambda * Matrix::Identity(dim, dim);
  out.xo = Vector::Zero(dim);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out.v += thetas[i] * thetas[i].transpose();
    out.xo += rewards[i] * thetas[i];
  }
  out.g = out.v.colPivHouseholderQr().solve(out.xo);
  // log det from the eigenvalues, independent of the Cholesky path.
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.v);
  for (Eigen::Index i = 0; i < dim; ++i) out.log_det += std::log(es.eigenvalues()(i));
  return out;
}

// Z = G Z G' + Q by plain fixed-point iteration.
inline Matrix lyapunov_fixed_point(const Matrix& g, const Matrix& q, int iters = 20000) {
  Matrix z = q;
  for (int i = 0; i < iters; ++i) {
    Matrix next = g * z * g.transpose() + q;
    if ((next - z).norm() < 1e-14 * std::max(1.0, z.norm())) return next;
    z = next;
  }
  return z;
}

inline Matrix sample_covariance(const std::vector<Vector>& xs) {
  const Eigen::Index d = xs.front().size();
  Vector mean = Vector::Zero(d);
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
  return cov / static_cast<double>(xs.size() - 1);
}

// Coefficient of determination of the least-squares line y ~ a + b x.
struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

inline Matrix random_spd(Eigen::Index n, ares::RandomStream& rng) {
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
  return a * a.transpose() + 0.5 * Matrix::Identity(n, n);
}

// Large-sample limit of least squares of X_t = c'z_t + eta on
// [theta_{t-s} .. theta_{t-1}, 1] for a stationary zero-mean system.
// Uses E[z_{t-b} z_{t-a}'] = gamma^{a-b} z for a >= b.
inline Vector population_ls(const Matrix& gamma, const Matrix& c_theta, const Matrix& r,
                            const Matrix& z, const Vector& c, std::size_t s) {
  const Eigen::Index m = c_theta.rows();
  const Eigen::Index dim = static_cast<Eigen::Index>(s) * m + 1;
  std::vector<Matrix> pw{Matrix::Identity(gamma.rows(), gamma.cols())};
  for (std::size_t k = 1; k <= s; ++k) pw.push_back(gamma * pw.back());
  Matrix sxx = Matrix::Zero(dim, dim);
  Vector sxy = Vector::Zero(dim);
  sxx(dim - 1, dim - 1) = 1.0;
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t lag_i = s - i;
    sxy.segment(static_cast<Eigen::Index>(i) * m, m) = c_theta * z * pw[lag_i].transpose() * c;
    for (std::size_t j = 0; j < s; ++j) {
      const std::size_t lag_j = s - j;
      Matrix blk;
      if (lag_i >= lag_j)
        blk = c_theta * z * pw[lag_i - lag_j].transpose() * c_theta.transpose();
      else
        blk = c_theta * pw[lag_j - lag_i] * z * c_theta.transpose();
      if (i == j) blk += r;
      sxx.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(j) * m, m, m) = blk;
    }
  }
  return sxx.ldlt().solve(sxy);
}

}  // namespace testing_support
