#include "infoplan/smoother.hpp"

#include <sstream>

namespace infoplan {

Matrix pin_exact_readout(const Matrix& P, const Matrix& hstack) {
  if (hstack.rows() == 0 || hstack.norm() == 0.0) {
    throw DegenerateVerificationError("verification stack is zero; nothing can be pinned");
  }
  const Matrix PH = symmetrized(P) * hstack.transpose();
  const Matrix G = symmetrized(hstack * PH);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  if (eig.info() != Eigen::Success) {
    throw NumericalConsistencyError("eigendecomposition of the pinned Gram matrix failed");
  }
  const Vector& ev = eig.eigenvalues();
  const double lambda_max = ev.size() ? ev.maxCoeff() : 0.0;
  if (lambda_max < 0.0 || ev.minCoeff() < -1e-9 * std::max(lambda_max, 0.0)) {
    throw DegenerateVerificationError("pinned Gram matrix is indefinite");
  }
  if (lambda_max <= 0.0) {
    // All requested directions already have zero covariance.
    return symmetrized(P);
  }
  const double cut = 1e-12 * lambda_max;
  Vector inv = Vector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut) inv(i) = 1.0 / ev(i);
  }
  const Matrix Gpinv =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return symmetrized(P - PH * Gpinv * PH.transpose());
}

Matrix boundary_projection(const Matrix& P_X_at_start, const DerivativeChain& chain,
                           double t_start) {
  return pin_exact_readout(P_X_at_start, chain.hstack(t_start));
}

SmootherSolution smooth_window(const DerivativeChain& chain, const Matrix& P_X_at_start,
                               const TimeGrid& window_grid) {
  const LinearGaussianSystem& system = chain.system();
  const Eigen::Index n = system.n_x();
  const Matrix Pbar0 = boundary_projection(P_X_at_start, chain, window_grid.t_start());

  // Forward: dPbar = Abar Pbar + Pbar Abar' + B Qbar B' - Pbar HK' Rbar^{-1} HK Pbar,
  // advanced by the exponential Riccati step (midpoint-frozen coefficients) so
  // the strong noise-free pinning cannot destabilize the integration and the
  // projected (singular) boundary value stays positive semidefinite.
  RiccatiStepper stepper;
  RiccatiStepper half_stepper;
  std::vector<Matrix> forward_values;
  std::vector<Matrix> mid_values;  // Pbar at each step midpoint, for backward stages.
  forward_values.reserve(window_grid.node_count());
  mid_values.reserve(window_grid.step_count());
  forward_values.push_back(Pbar0);
  const double h = window_grid.step();
  for (std::size_t s = 0; s < window_grid.step_count(); ++s) {
    const double t_mid = window_grid.t_start() + static_cast<double>(s) * h + 0.5 * h;
    const Matrix Ab = chain.abar(t_mid);
    const Matrix Bt = system.B(t_mid);
    const Matrix HK = chain.h_at(chain.K(), t_mid);
    const auto rbar_llt = cholesky_spd(chain.rbar(t_mid), "Rbar");
    const Matrix M = symmetrized(HK.transpose() * rbar_llt.solve(HK));
    const Matrix G = symmetrized(Bt * chain.qbar(t_mid) * Bt.transpose());
    mid_values.push_back(half_stepper.step(Ab, G, M, 0.5 * h, forward_values.back()));
    Matrix next = stepper.step(Ab, G, M, h, forward_values.back());
    if (!next.allFinite()) {
      std::ostringstream os;
      os << "window covariance diverged at t = " << window_grid.node(s + 1);
      throw DivergenceError(os.str());
    }
    forward_values.push_back(std::move(next));
  }
  MatrixTrajectory pbar(window_grid, std::move(forward_values));

  // Backward: dLambda = -(Abar - Pbar M)' Lambda - Lambda (Abar - Pbar M) - M
  // from Lambda(T_f) = 0, with M = HK' Rbar^{-1} HK. Classical RK4 per step,
  // with Pbar at the stage times taken from the stored node and half-node
  // values rather than interpolated, which would cap the order at two.
  const auto stage_rhs = [&chain](double t, const Matrix& Pb_t, const Matrix& L) -> Matrix {
    const Matrix Ab = chain.abar(t);
    const Matrix HK = chain.h_at(chain.K(), t);
    const auto rbar_llt = cholesky_spd(chain.rbar(t), "Rbar");
    const Matrix M = HK.transpose() * rbar_llt.solve(HK);
    const Matrix F = Ab - Pb_t * M;
    return -F.transpose() * L - L * F - M;
  };
  Matrix lambda = Matrix::Zero(n, n);
  for (std::size_t s = window_grid.step_count(); s-- > 0;) {
    const double t0 = window_grid.node(s);
    const double t1 = window_grid.node(s + 1);
    const double t_mid = window_grid.t_start() + static_cast<double>(s) * h + 0.5 * h;
    const double hb = -h;
    const Matrix k1 = stage_rhs(t1, pbar.at_node(s + 1), lambda);
    const Matrix k2 = stage_rhs(t_mid, mid_values[s], lambda + (0.5 * hb) * k1);
    const Matrix k3 = stage_rhs(t_mid, mid_values[s], lambda + (0.5 * hb) * k2);
    const Matrix k4 = stage_rhs(t0, pbar.at_node(s), lambda + hb * k3);
    lambda = symmetrized(lambda + (hb / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (!lambda.allFinite()) {
      std::ostringstream os;
      os << "window information flow diverged at t = " << t0;
      throw DivergenceError(os.str());
    }
  }

  const Matrix& Pb = pbar.front();
  const Matrix p_xv = symmetrized(Pb - Pb * lambda * Pb);
  return SmootherSolution{std::move(pbar), lambda, p_xv};
}

Matrix p0_given_window(const LinearGaussianSystem& system, const VerificationSpec& spec,
                       const SolverOptions& options) {
  if (spec.kind() != VerificationSpec::Kind::Window) {
    throw ConfigError("p0_given_window needs a window spec");
  }
  const DerivativeChain chain =
      build_chain(system, spec, options.chain_k_max, default_chain_samples(spec));

  const TimeGrid window_grid(spec.t_start(), spec.t_end(), options.step);
  if (spec.t_start() == 0.0) {
    return smooth_window(chain, system.P0, window_grid).p_xv_at_start;
  }

  const TimeGrid head_grid(0.0, spec.t_start(), options.step);
  const MatrixTrajectory p_x = lyapunov_forward(system, system.P0, head_grid);
  const SmootherSolution sol = smooth_window(chain, p_x.back(), window_grid);
  const MatrixTrajectory p_xv = conditional_lyapunov_backward(system, sol.p_xv_at_start, p_x);
  return p_xv.front();
}

Matrix p0_given_point(const LinearGaussianSystem& system, const VerificationSpec& spec,
                      const SolverOptions& options) {
  const double T = spec.kind() == VerificationSpec::Kind::Point ? spec.t_start()
                                                                : spec.t_end();
  const TimeGrid grid(0.0, T, options.step);
  const MatrixTrajectory p_x = lyapunov_forward(system, system.P0, grid);
  const Matrix Mv = spec.mv_at(T, 0);
  if (Mv.norm() == 0.0) {
    throw DegenerateVerificationError("verification matrix is zero at the readout time");
  }
  const Matrix G = symmetrized(Mv * p_x.back() * Mv.transpose());
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) {
    Matrix Gj = G + spd_jitter(G) * Matrix::Identity(G.rows(), G.cols());
    llt.compute(Gj);
    if (llt.info() != Eigen::Success) {
      throw DegenerateVerificationError(
          "verification Gram matrix at the readout time is singular");
    }
  }
  const Matrix Phi = state_transition(system, 0.0, T, options.step);
  const Matrix W = Mv * Phi * system.P0;  // n_v by n_x
  return symmetrized(system.P0 - W.transpose() * llt.solve(W));
}

}  // namespace infoplan
