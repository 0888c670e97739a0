#include "infoplan/mi.hpp"

#include <algorithm>

namespace infoplan {

FlowBundle make_flow_bundle(const LinearGaussianSystem& system, const Matrix& p0_given_v,
                            const TimeGrid& grid) {
  const Matrix s_x0 = spd_inverse(system.P0, "P0");
  const Matrix s_xv0 = spd_inverse(p0_given_v, "conditional prior");
  auto [s_x, s_xv] = info_forms_forward(system, s_x0, s_xv0, grid);
  std::vector<double> j0(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    j0[i] = 0.5 * (ldet(s_xv.at_node(i), "conditional information") -
                   ldet(s_x.at_node(i), "prior information"));
  }
  return FlowBundle{std::move(s_x), std::move(s_xv), std::move(j0)};
}

double mi_at_node(const FlowBundle& bundle, std::size_t node, const Matrix& Q) {
  const Matrix delta = bundle.delta_at_node(node);
  const Eigen::Index n = Q.rows();
  const Matrix M = Matrix::Identity(n, n) + Q * delta;
  return bundle.j0[node] - 0.5 * ldet_positive_product(M, "I + Q Delta");
}

Matrix info_gain_kernel(const Matrix& Q, const Matrix& delta) {
  const Eigen::Index n = Q.rows();
  const Matrix M = Matrix::Identity(n, n) + Q * delta;
  Eigen::PartialPivLU<Matrix> lu(M);
  const Matrix Y = lu.solve(Q);
  if (!Y.allFinite()) {
    throw NumericalConsistencyError("inversion of I + Q Delta failed");
  }
  // Q Delta (I + Q Delta)^{-1} Q == Q - (I + Q Delta)^{-1} Q.
  return symmetrized(Q - Y);
}

double info_rate(const Matrix& Q, const Matrix& delta, const Matrix& C,
                 const Matrix& sigma_n) {
  const Matrix pi = info_gain_kernel(Q, delta);
  const auto llt = cholesky_spd(sigma_n, "Sigma_N");
  const Matrix CP = C * pi;
  return 0.5 * llt.solve(CP * C.transpose()).trace();
}

namespace {

InfoReport accumulate_over_horizon(const LinearGaussianSystem& system,
                                   const SensingModel& sensing, const Matrix& p0_given_v,
                                   double tau, const SolverOptions& options,
                                   const std::vector<double>& interval_edges) {
  const TimeGrid grid(0.0, tau, options.step);
  const FlowBundle bundle = make_flow_bundle(system, p0_given_v, grid);
  const MatrixTrajectory q = riccati_filter_forward(system, sensing, system.P0, grid);

  InfoReport report;
  report.times.resize(grid.node_count());
  report.onthefly.resize(grid.node_count());
  report.rate.resize(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const double t = grid.node(i);
    report.times[i] = t;
    report.onthefly[i] = mi_at_node(bundle, i, q.at_node(i));
    report.rate[i] =
        info_rate(q.at_node(i), bundle.delta_at_node(i), sensing.C(t), sensing.sigma_n);
  }
  report.total_mi = report.onthefly.back();
  report.j0_end = bundle.j0.back();

  if (!interval_edges.empty()) {
    if (interval_edges.size() < 2 || interval_edges.front() != 0.0 ||
        std::abs(interval_edges.back() - tau) > 1e-9) {
      throw ConfigError("interval edges must run from 0 to tau");
    }
    for (std::size_t k = 1; k < interval_edges.size(); ++k) {
      const std::size_t a = grid.node_index(interval_edges[k - 1]);
      const std::size_t b = grid.node_index(interval_edges[k]);
      if (b <= a) throw ConfigError("interval edges must be strictly increasing");
      report.interval_gains.push_back(report.onthefly[b] - report.onthefly[a]);
    }
  }
  return report;
}

}  // namespace

InfoReport mi_windowed(const LinearGaussianSystem& system, const SensingModel& sensing,
                       const VerificationSpec& spec, double tau, const SolverOptions& options,
                       const std::vector<double>& interval_edges) {
  if (spec.kind() != VerificationSpec::Kind::Window) {
    throw ConfigError("mi_windowed needs a window spec");
  }
  if (tau < 0.0) throw ConfigError("measurement horizon must be nonnegative");
  if (tau > spec.t_start() + 1e-12) {
    throw ConfigError(
        "measurement horizon must end at or before the verification window starts");
  }
  const Matrix p0v = p0_given_window(system, spec, options);
  return accumulate_over_horizon(system, sensing, p0v, tau, options, interval_edges);
}

InfoReport mi_pointwise_smoother(const LinearGaussianSystem& system,
                                 const SensingModel& sensing, const VerificationSpec& spec,
                                 double tau, const SolverOptions& options) {
  if (spec.kind() != VerificationSpec::Kind::Point) {
    throw ConfigError("mi_pointwise_smoother needs a point spec");
  }
  if (tau < 0.0) throw ConfigError("measurement horizon must be nonnegative");
  if (tau > spec.t_start() + 1e-12) {
    throw ConfigError("measurement horizon must end at or before the readout time");
  }
  const Matrix p0v = p0_given_point(system, spec, options);
  return accumulate_over_horizon(system, sensing, p0v, tau, options, {});
}

double mi_pointwise_filter(const LinearGaussianSystem& system, const SensingModel& sensing,
                           const VerificationSpec& spec, double tau,
                           const SolverOptions& options) {
  if (spec.kind() != VerificationSpec::Kind::Point) {
    throw ConfigError("mi_pointwise_filter needs a point spec");
  }
  const double T = spec.t_start();
  if (tau < 0.0 || tau > T + 1e-12) {
    throw ConfigError("measurement horizon must lie within [0, T]");
  }

  const TimeGrid full(0.0, T, options.step);
  const MatrixTrajectory p_x = lyapunov_forward(system, system.P0, full);

  const TimeGrid sensed(0.0, std::min(tau, T), options.step);
  Matrix Q = riccati_filter_forward(system, sensing, system.P0, sensed).back();
  if (T > tau + 1e-12) {
    const TimeGrid coast(tau, T, options.step);
    Q = lyapunov_forward(system, Q, coast).back();
  }

  const Matrix Mv = spec.mv_at(T, 0);
  const double prior = ldet(symmetrized(Mv * p_x.back() * Mv.transpose()),
                            "verification prior Gram");
  const double post =
      ldet(symmetrized(Mv * Q * Mv.transpose()), "verification posterior Gram");
  return 0.5 * (prior - post);
}

}  // namespace infoplan
