#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "infoplan/system.hpp"

namespace testsupport {

using infoplan::LinearGaussianSystem;
using infoplan::Matrix;
using infoplan::MatrixPoly;
using infoplan::SensingModel;
using infoplan::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

/// Well-conditioned random SPD matrix with eigenvalues roughly in
/// [0.3 * scale, 4 * scale].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  const Matrix g = random_matrix(rng, n, n);
  return scale * (g * g.transpose() / static_cast<double>(n) +
                  0.3 * Matrix::Identity(n, n));
}

struct SystemOptions {
  Eigen::Index n_x = 3;
  Eigen::Index n_w = 0;  // 0 = same as n_x (full-row-rank noise routing)
  double stability_margin = 0.4;
  bool time_varying = false;
};

/// Random stable system: drift eigenvalues shifted so the largest real part
/// equals -stability_margin, random SPD process noise and prior.
inline LinearGaussianSystem random_stable_system(std::uint64_t seed, SystemOptions opt = {}) {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = opt.n_x;
  const Eigen::Index n_w = opt.n_w > 0 ? opt.n_w : n;
  Matrix A0 = random_matrix(rng, n, n);
  const double max_re = Eigen::EigenSolver<Matrix>(A0).eigenvalues().real().maxCoeff();
  A0 -= (max_re + opt.stability_margin) * Matrix::Identity(n, n);

  LinearGaussianSystem system;
  if (opt.time_varying) {
    std::vector<Matrix> coeffs;
    coeffs.push_back(A0);
    coeffs.push_back(random_matrix(rng, n, n, 0.05));
    system.A = MatrixPoly(std::move(coeffs));
  } else {
    system.A = MatrixPoly::constant(A0);
  }
  system.B = MatrixPoly::constant(random_matrix(rng, n, n_w) +
                                  0.2 * Matrix::Identity(n, n_w));
  system.sigma_w = random_spd(rng, n_w, 0.5);
  system.mu0 = Vector::Zero(n);
  system.P0 = random_spd(rng, n);
  system.validate();
  return system;
}

/// Random constant sensing with well-conditioned noise of order one.
inline SensingModel random_sensing(std::uint64_t seed, Eigen::Index n_x, Eigen::Index n_z) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Matrix C0 = random_matrix(rng, n_z, n_x);
  SensingModel m;
  m.n_z = n_z;
  m.sigma_n = random_spd(rng, n_z, 0.5) + 0.25 * Matrix::Identity(n_z, n_z);
  m.C = [C0](double) { return C0; };
  return m;
}

/// Random readout matrix (full row rank with probability one).
inline Matrix random_readout(std::uint64_t seed, Eigen::Index n_v, Eigen::Index n_x) {
  std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ULL);
  return random_matrix(rng, n_v, n_x);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Matrix& sym) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(infoplan::symmetrized(sym),
                                               Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

inline double rel_fro_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

}  // namespace testsupport
