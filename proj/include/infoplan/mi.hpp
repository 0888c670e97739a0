#pragma once

#include <vector>

#include "infoplan/smoother.hpp"

namespace infoplan {

/// Decision-independent part of the information accumulation over the
/// measurement horizon: the prior and conditional information forms plus the
/// per-node half-log-det gap
///   j0(t) = 0.5 (ldet S_XV(t) - ldet S_X(t)).
/// Only the filtering covariance depends on the sensing decision, so planners
/// reuse one bundle across all candidate evaluations.
struct FlowBundle {
  MatrixTrajectory s_x;
  MatrixTrajectory s_xv;
  std::vector<double> j0;

  const TimeGrid& grid() const { return s_x.grid(); }
  Matrix delta_at_node(std::size_t i) const { return s_xv.at_node(i) - s_x.at_node(i); }
  Matrix delta_at_time(double t) const { return s_xv.at_time(t) - s_x.at_time(t); }
};

FlowBundle make_flow_bundle(const LinearGaussianSystem& system, const Matrix& p0_given_v,
                            const TimeGrid& grid);

/// Accumulated mutual information at a node given the filtering covariance
/// there: j0(node) - 0.5 ldet(I + Q Delta).
double mi_at_node(const FlowBundle& bundle, std::size_t node, const Matrix& Q);

/// Pi = Q Delta (I + Q Delta)^{-1} Q, the kernel of the information-rate
/// trace and of the steering gradient.
Matrix info_gain_kernel(const Matrix& Q, const Matrix& delta);

/// Instantaneous accumulation rate 0.5 tr(Sigma_N^{-1} C Pi C').
double info_rate(const Matrix& Q, const Matrix& delta, const Matrix& C,
                 const Matrix& sigma_n);

struct InfoReport {
  double total_mi = 0.0;     // nats
  double j0_end = 0.0;       // nats; upper bound reached as Q -> 0
  std::vector<double> times;
  std::vector<double> onthefly;        // accumulated MI per node, nats
  std::vector<double> rate;            // nats per unit time per node
  std::vector<double> interval_gains;  // per decision interval when edges given
};

/// Mutual information between the windowed verification path and the
/// measurement history over [0, tau], evaluated in the smoother form with a
/// full on-the-fly trace. Requires tau <= window start. Optional interval
/// edges (starting at 0 and ending at tau) produce per-interval gains.
InfoReport mi_windowed(const LinearGaussianSystem& system, const SensingModel& sensing,
                       const VerificationSpec& spec, double tau,
                       const SolverOptions& options = {},
                       const std::vector<double>& interval_edges = {});

/// Same accumulation machinery for a point verification readout (smoother
/// form with the closed-form conditional prior).
InfoReport mi_pointwise_smoother(const LinearGaussianSystem& system,
                                 const SensingModel& sensing, const VerificationSpec& spec,
                                 double tau, const SolverOptions& options = {});

/// Filter-form cross check for point readouts:
///   0.5 ldet(M_V P_X(T) M_V') - 0.5 ldet(M_V Q_X(T) M_V')
/// where the filtering covariance runs with sensing active on [0, tau] and
/// inactive on (tau, T].
double mi_pointwise_filter(const LinearGaussianSystem& system, const SensingModel& sensing,
                           const VerificationSpec& spec, double tau,
                           const SolverOptions& options = {});

}  // namespace infoplan
