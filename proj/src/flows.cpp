#include "infoplan/flows.hpp"

#include <sstream>

namespace infoplan {

namespace {

void check_pd_nodes(const MatrixTrajectory& traj, const char* label) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Eigen::LLT<Matrix> llt(traj.at_node(i));
    if (llt.info() != Eigen::Success) {
      const Matrix& X = traj.at_node(i);
      Eigen::LLT<Matrix> retry(X + spd_jitter(X) * Matrix::Identity(X.rows(), X.cols()));
      if (retry.info() != Eigen::Success) {
        std::ostringstream os;
        os << label << " lost positive definiteness at t = " << traj.grid().node(i);
        throw NotPositiveDefiniteError(os.str());
      }
    }
  }
}

}  // namespace

MatrixTrajectory lyapunov_forward(const LinearGaussianSystem& system, const Matrix& P_start,
                                  const TimeGrid& grid) {
  const MatrixRhs rhs = [&system](double t, const Matrix& P) -> Matrix {
    const Matrix At = system.A(t);
    return At * P + P * At.transpose() + system.noise_gramian(t);
  };
  return integrate_matrix_ode(rhs, P_start, grid, Direction::Forward, {.symmetrize = true});
}

std::pair<MatrixTrajectory, MatrixTrajectory> info_forms_forward(
    const LinearGaussianSystem& system, const Matrix& S_X_start, const Matrix& S_XV_start,
    const TimeGrid& grid) {
  // Integrating the information forms directly is stiff whenever the prior
  // relaxes quickly (the flows carry the inverse dynamics). Split instead:
  //   S_X  = P_X^{-1}      with dP_X = A P_X + P_X A' + G  (tame, RK4),
  //   S_XV = S_X + Delta   with dDelta = -A' Delta - Delta A + Delta G Delta,
  // where the cross terms of the two original flows cancel exactly. The
  // Delta flow maps onto the exponential stepper with (A, G, M) ->
  // (-A', 0, -G); its doubled system is block triangular, so the step is
  // exact for frozen coefficients at any step size.
  const Matrix P_X_start = spd_inverse(S_X_start, "prior information form");
  MatrixTrajectory p_x = lyapunov_forward(system, P_X_start, grid);

  RiccatiStepper stepper;
  const double h = grid.step();
  std::vector<Matrix> s_x_nodes;
  std::vector<Matrix> s_xv_nodes;
  s_x_nodes.reserve(grid.node_count());
  s_xv_nodes.reserve(grid.node_count());
  s_x_nodes.push_back(symmetrized(S_X_start));
  s_xv_nodes.push_back(symmetrized(S_XV_start));
  Matrix delta = symmetrized(S_XV_start - S_X_start);
  const Eigen::Index n = delta.rows();
  const Matrix zero = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < grid.step_count(); ++s) {
    const double t_mid = grid.t_start() + static_cast<double>(s) * h + 0.5 * h;
    delta = stepper.step(-system.A(t_mid).transpose(), zero,
                         -system.noise_gramian(t_mid), h, delta);
    if (!delta.allFinite()) {
      std::ostringstream os;
      os << "information gap diverged at t = " << grid.node(s + 1);
      throw DivergenceError(os.str());
    }
    Matrix s_x = spd_inverse(p_x.at_node(s + 1), "prior covariance");
    s_xv_nodes.push_back(symmetrized(s_x + delta));
    s_x_nodes.push_back(std::move(s_x));
  }
  MatrixTrajectory s_x_traj(grid, std::move(s_x_nodes));
  MatrixTrajectory s_xv_traj(grid, std::move(s_xv_nodes));
  check_pd_nodes(s_x_traj, "prior information form");
  check_pd_nodes(s_xv_traj, "conditional information form");
  return {std::move(s_x_traj), std::move(s_xv_traj)};
}

namespace {

/// Shared stage rule for the filter flow: coefficients frozen at the step
/// midpoint, advanced by the exponential stepper. The midpoint time must be
/// computed identically everywhere (t_base + s*h + 0.5*h) so that planners
/// scoring candidates and re-evaluating final plans reproduce bitwise.
Matrix riccati_exp_step(RiccatiStepper& stepper, const LinearGaussianSystem& system,
                        const SensingModel& sensing, const Eigen::LLT<Matrix>& sigma_n_llt,
                        double t_mid, double h, const Matrix& Q) {
  const Matrix Ct = sensing.C(t_mid);
  const Matrix M = Ct.transpose() * sigma_n_llt.solve(Ct);
  return stepper.step(system.A(t_mid), system.noise_gramian(t_mid), M, h, Q);
}

}  // namespace

MatrixTrajectory riccati_filter_forward(const LinearGaussianSystem& system,
                                        const SensingModel& sensing, const Matrix& Q_start,
                                        const TimeGrid& grid) {
  const auto sigma_n_llt = cholesky_spd(sensing.sigma_n, "Sigma_N");
  RiccatiStepper stepper;
  std::vector<Matrix> values;
  values.reserve(grid.node_count());
  values.push_back(symmetrized(Q_start));
  const double h = grid.step();
  for (std::size_t s = 0; s < grid.step_count(); ++s) {
    const double t_mid = grid.t_start() + static_cast<double>(s) * h + 0.5 * h;
    Matrix next =
        riccati_exp_step(stepper, system, sensing, sigma_n_llt, t_mid, h, values.back());
    if (!next.allFinite()) {
      std::ostringstream os;
      os << "filter covariance diverged at t = " << grid.node(s + 1);
      throw DivergenceError(os.str());
    }
    values.push_back(std::move(next));
  }
  return MatrixTrajectory(grid, std::move(values));
}

Matrix riccati_filter_propagate(const LinearGaussianSystem& system, const SensingModel& sensing,
                                Matrix Q, double t0, double h, std::size_t n_steps) {
  const auto sigma_n_llt = cholesky_spd(sensing.sigma_n, "Sigma_N");
  RiccatiStepper stepper;
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double t_mid = t0 + static_cast<double>(s) * h + 0.5 * h;
    Q = riccati_exp_step(stepper, system, sensing, sigma_n_llt, t_mid, h, Q);
    if (!Q.allFinite()) {
      std::ostringstream os;
      os << "filter covariance diverged at t = " << t0 + static_cast<double>(s + 1) * h;
      throw DivergenceError(os.str());
    }
  }
  return Q;
}

MatrixTrajectory conditional_lyapunov_backward(const LinearGaussianSystem& system,
                                               const Matrix& P_XV_at_end,
                                               const MatrixTrajectory& P_X) {
  const TimeGrid& grid = P_X.grid();
  // Retrace the prior covariance backward alongside the conditional one so
  // the coupling coefficient F = A + G P^{-1} is evaluated at stage-consistent
  // prior values; interpolating the stored trajectory at stage times would
  // cap the whole transport at second order.
  const MatrixPairRhs rhs = [&system](double t, const Matrix& P,
                                      const Matrix& P_XV) -> std::pair<Matrix, Matrix> {
    const Matrix At = system.A(t);
    const Matrix G = system.noise_gramian(t);
    Matrix dP = At * P + P * At.transpose() + G;
    const auto llt = cholesky_spd(P, "prior covariance");
    const Matrix F = At + G * llt.solve(Matrix::Identity(P.rows(), P.cols()));
    Matrix dP_XV = F * P_XV + P_XV * F.transpose() - G;
    return {std::move(dP), std::move(dP_XV)};
  };
  auto out = integrate_matrix_ode_pair(rhs, P_X.back(), P_XV_at_end, grid,
                                       Direction::Backward, {.symmetrize = true});
  return std::move(out.second);
}

}  // namespace infoplan
