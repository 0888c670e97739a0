#pragma once

#include "infoplan/system.hpp"

namespace infoplan {

/// Prior covariance flow dP = A P + P A' + B Sigma_W B', forward across the grid.
MatrixTrajectory lyapunov_forward(const LinearGaussianSystem& system, const Matrix& P_start,
                                  const TimeGrid& grid);

/// Coupled forward flow of the prior information S_X and the conditional
/// information S_XV:
///   dS_X  = -S_X A - A' S_X - S_X B Sigma_W B' S_X
///   dS_XV =  S_XV B Sigma_W B' S_XV - S_XV F - F' S_XV,  F = A + B Sigma_W B' S_X.
/// Both must stay positive definite; loss of definiteness raises
/// NotPositiveDefiniteError with the node time in the message.
std::pair<MatrixTrajectory, MatrixTrajectory> info_forms_forward(
    const LinearGaussianSystem& system, const Matrix& S_X_start, const Matrix& S_XV_start,
    const TimeGrid& grid);

/// Filtering covariance flow
///   dQ = A Q + Q A' + B Sigma_W B' - Q C' Sigma_N^{-1} C Q
/// forward across the grid with the sensing model's C(t).
MatrixTrajectory riccati_filter_forward(const LinearGaussianSystem& system,
                                        const SensingModel& sensing, const Matrix& Q_start,
                                        const TimeGrid& grid);

/// Single streamed Riccati step sequence over [t0, t0 + n_steps*h] returning
/// only the final matrix; used by planners that evaluate many candidates.
Matrix riccati_filter_propagate(const LinearGaussianSystem& system, const SensingModel& sensing,
                                Matrix Q, double t0, double h, std::size_t n_steps);

/// Backward conditional covariance transport from the window start to time
/// zero, coupled to the stored prior covariance trajectory:
///   dP_XV = (A + G P_X^{-1}) P_XV + P_XV (A + G P_X^{-1})' - G,  G = B Sigma_W B'.
/// P_X must be the forward Lyapunov trajectory on the same grid. Returns the
/// full trajectory (node 0 is the value at the grid start).
MatrixTrajectory conditional_lyapunov_backward(const LinearGaussianSystem& system,
                                               const Matrix& P_XV_at_end,
                                               const MatrixTrajectory& P_X);

}  // namespace infoplan
