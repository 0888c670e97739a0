#pragma once

#include <vector>

#include "infoplan/system.hpp"

namespace infoplan {

/// Derivative chain of a windowed verification readout. H_0 = M_V and
/// H_{k+1} = dH_k/dt + H_k A, built until the process noise first enters:
/// K is the smallest order whose derivative carries white noise, i.e. the
/// first k with H_{k-1} B != 0. The chain stores H_0..H_K plus the matrices
/// of the reduced window dynamics.
class DerivativeChain {
 public:
  DerivativeChain(LinearGaussianSystem system, std::vector<MatrixPoly> h, int K);

  int K() const { return K_; }
  Eigen::Index n_v() const { return h_.front().rows(); }
  const MatrixPoly& h_poly(int k) const { return h_.at(static_cast<std::size_t>(k)); }
  Matrix h_at(int k, double t) const { return h_.at(static_cast<std::size_t>(k))(t); }

  /// Noise intensity of the K-th derivative: H_{K-1} B Sigma_W B' H_{K-1}'.
  Matrix rbar(double t) const;
  /// Drift of the window dynamics: A - B Sigma_W B' H_{K-1}' Rbar^{-1} H_K.
  Matrix abar(double t) const;
  /// Reduced process noise: Sigma_W - Sigma_W B' H_{K-1}' Rbar^{-1} H_{K-1} B Sigma_W.
  Matrix qbar(double t) const;
  /// Noise coupling gain: B Sigma_W B' H_{K-1}' Rbar^{-1}.
  Matrix gbar(double t) const;
  /// Stack of H_0..H_{K-1} (K*n_v rows), the noise-free derivatives pinned at
  /// the window start.
  Matrix hstack(double t) const;

  const LinearGaussianSystem& system() const { return system_; }

 private:
  LinearGaussianSystem system_;
  std::vector<MatrixPoly> h_;
  int K_;
};

/// Numerical rank of H_k B Sigma_W^{1/2}.
Eigen::Index rank_of_noise_coupling(const Matrix& H_k, const Matrix& B, const Matrix& sigma_w);

/// Build the derivative chain of a window spec, sampling the rank structure
/// at the given times (all within the window). Raises
/// AssumptionViolationError when the rank varies over the samples, when a
/// nonzero coupling is rank-deficient (a decomposition of the verification
/// variables would be required), or when no noise enters within k_max orders.
DerivativeChain build_chain(const LinearGaussianSystem& system, const VerificationSpec& spec,
                            int k_max, const std::vector<double>& sample_times);

/// Uniformly spaced chain sample times across the spec's window.
std::vector<double> default_chain_samples(const VerificationSpec& spec, int count = 9);

}  // namespace infoplan
