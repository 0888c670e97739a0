#pragma once

#include <vector>

#include "infoplan/system.hpp"

namespace infoplan {
namespace oracle {

/// One linear functional of the state path: selector * X(t), optionally with
/// additive sampling noise (covariance per sample).
struct Query {
  double t = 0.0;
  Matrix selector;
  Matrix noise;  // empty for noise-free readouts

  Eigen::Index rows() const { return selector.rows(); }
};

/// Exact discretization of the system on an irregular event grid: per-gap
/// transition matrices and process-noise covariances computed from the
/// augmented block exponential (Van Loan construction) with the shared RK4
/// kernel.
struct DiscreteJointModel {
  LinearGaussianSystem system;
  std::vector<double> times;   // sorted, first event is t = 0
  std::vector<Matrix> phi;     // phi[k]: times[k] -> times[k+1]
  std::vector<Matrix> qd;      // accumulated process noise per gap
};

/// Build the discrete model over the given event times (deduplicated, t = 0
/// prepended when missing). The exponential substep bounds the RK4 step used
/// inside each gap.
DiscreteJointModel build_discrete_model(const LinearGaussianSystem& system,
                                        std::vector<double> event_times, double exp_substep);

struct JointCovariance {
  Matrix sigma;
  std::vector<Eigen::Index> offsets;  // row offset of each query block
};

/// Joint covariance of the stacked query functionals. Query times must
/// coincide with model events; queries must be sorted by time (stable order
/// within a shared time).
JointCovariance joint_covariance(const DiscreteJointModel& model,
                                 const std::vector<Query>& queries);

struct BruteMiOptions {
  double dt = 1e-3;          // measurement sampling step (midpoint rule)
  int m_samples = 200;       // verification path samples across the window
  double exp_substep = 1e-3;
};

/// Brute-force mutual information between the sampled verification path and
/// the sampled measurement history:
///   0.5 (ldet Cov(V) + ldet Cov(Z) - ldet Cov(V, Z)).
/// Measurements are sampled at gap midpoints over [0, tau] with per-sample
/// noise Sigma_N / dt. Converges to the continuous value from below as dt
/// shrinks and m grows.
double brute_mi(const LinearGaussianSystem& system, const SensingModel& sensing,
                const VerificationSpec& spec, double tau, const BruteMiOptions& options = {});

/// Covariance of target_selector * X(target_t) conditioned on exact
/// observations of the given queries, via the Schur complement of the joint
/// covariance. Ill-conditioned given-blocks get one jitter retry, then raise.
Matrix schur_conditional(const LinearGaussianSystem& system, double target_t,
                         const Matrix& target_selector, const std::vector<Query>& given,
                         double exp_substep = 1e-3);

/// Uniform verification-path sample queries across a window spec (noise-free).
std::vector<Query> verification_samples(const VerificationSpec& spec, int m_samples);

}  // namespace oracle
}  // namespace infoplan
