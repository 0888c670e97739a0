#pragma once

#include "infoplan/chain.hpp"
#include "infoplan/flows.hpp"

namespace infoplan {

/// Condition a covariance on exact knowledge of Hstack * X: returns
/// P - P H' (H P H')^+ H P, where the pseudo-inverse uses a relative
/// eigenvalue cutoff so that directions already pinned are left untouched
/// (the projection is idempotent). A zero stack raises
/// DegenerateVerificationError.
Matrix pin_exact_readout(const Matrix& P, const Matrix& hstack);

/// Pin the noise-free derivatives of the chain at the window start.
Matrix boundary_projection(const Matrix& P_X_at_start, const DerivativeChain& chain,
                           double t_start);

struct SmootherSolution {
  MatrixTrajectory pbar;    // reduced forward covariance across the window
  Matrix lambda_at_start;   // accumulated backward information at the window start
  Matrix p_xv_at_start;     // Cov(X_{T_i} | verification path)
};

/// Fixed-interval smoothing of the window: forward Riccati for the reduced
/// covariance from the projected boundary, backward information accumulation
/// from zero at the window end, then
///   P_XV(T_i) = Pbar(T_i) - Pbar(T_i) Lambda(T_i) Pbar(T_i).
SmootherSolution smooth_window(const DerivativeChain& chain, const Matrix& P_X_at_start,
                               const TimeGrid& window_grid);

struct SolverOptions {
  double step = 1e-3;
  int chain_k_max = 6;
};

/// Covariance of the initial state conditioned on the whole verification
/// path: prior Lyapunov to the window start, window smoothing, then backward
/// conditional transport to time zero. For point specs use p0_given_point.
Matrix p0_given_window(const LinearGaussianSystem& system, const VerificationSpec& spec,
                       const SolverOptions& options = {});

/// Closed-form covariance of the initial state conditioned on M_V X at a
/// single time T:
///   P0 - P0 Phi(T,0)' M_V' [M_V P_X(T) M_V']^{-1} M_V Phi(T,0) P0.
Matrix p0_given_point(const LinearGaussianSystem& system, const VerificationSpec& spec,
                      const SolverOptions& options = {});

}  // namespace infoplan
