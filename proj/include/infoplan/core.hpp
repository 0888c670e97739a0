#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "infoplan/errors.hpp"

namespace infoplan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Uniform time grid over [t_start, t_end]. The step must divide the span
/// (relative tolerance 1e-9); a zero-length span is a single node.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, double step);

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double step() const { return step_; }
  std::size_t step_count() const { return steps_; }
  std::size_t node_count() const { return steps_ + 1; }
  double node(std::size_t i) const;
  /// Index of the node nearest to t; throws ConfigError if t is not a node
  /// (tolerance 1e-9 of a step).
  std::size_t node_index(double t) const;

 private:
  double t_start_;
  double t_end_;
  double step_;
  std::size_t steps_;
};

/// Matrix-valued function sampled on a TimeGrid, with linear interpolation
/// between nodes for stage-time lookups.
class MatrixTrajectory {
 public:
  MatrixTrajectory(TimeGrid grid, std::vector<Matrix> values);

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const Matrix& at_node(std::size_t i) const { return values_.at(i); }
  const Matrix& front() const { return values_.front(); }
  const Matrix& back() const { return values_.back(); }
  Matrix at_time(double t) const;

 private:
  TimeGrid grid_;
  std::vector<Matrix> values_;
};

enum class Direction { Forward, Backward };

using MatrixRhs = std::function<Matrix(double, const Matrix&)>;

struct IntegrateOptions {
  /// Re-symmetrize the state as (X + X')/2 after every step; use for flows
  /// whose exact solutions are symmetric.
  bool symmetrize = false;
};

/// One classical fourth-order Runge-Kutta step from (t, X) with signed
/// step h; returns the state at t + h.
Matrix rk4_step(const MatrixRhs& rhs, double t, const Matrix& X, double h);

/// Integrate dX/dt = rhs(t, X) across the grid. Forward starts from X_at_start
/// at grid.t_start(); backward treats X_at_start as the value at grid.t_end()
/// and steps in reversed time with the negated right-hand side. Values are
/// stored at every node in ascending time order either way. Non-finite
/// entries raise DivergenceError with the offending time.
MatrixTrajectory integrate_matrix_ode(const MatrixRhs& rhs, const Matrix& X_at_start,
                                      const TimeGrid& grid, Direction direction,
                                      const IntegrateOptions& options = {});

using MatrixPairRhs =
    std::function<std::pair<Matrix, Matrix>(double, const Matrix&, const Matrix&)>;

/// Coupled two-matrix variant: both states advance through shared RK4 stages,
/// so coupling terms see stage-consistent values rather than interpolants.
std::pair<MatrixTrajectory, MatrixTrajectory> integrate_matrix_ode_pair(
    const MatrixPairRhs& rhs, const Matrix& X0, const Matrix& Y0, const TimeGrid& grid,
    Direction direction, const IntegrateOptions& options = {});

/// State transition matrix of dx/dt = A(t) x from t1 to t2 (either order),
/// integrated with RK4 at the given step size.
Matrix state_transition(const std::function<Matrix(double)>& A, Eigen::Index n, double t1,
                        double t2, double step);

/// One step of the filter Riccati flow
///   dQ = A Q + Q A' + G - Q M Q
/// through the exponential of the doubled system:
///   Q(h) = (Psi11 Q + Psi12) (Psi21 Q + Psi22)^{-1},
///   Psi  = exp(h [[A, G], [M, -A']]).
/// Exact for coefficients frozen over the step and stable for any h, which
/// explicit stepping is not once ||M|| ||Q|| is large (strong sensing of a
/// loose prior collapses Q on a timescale far below any practical grid).
/// When the step spans many transient time constants the resolvent
/// Psi21 Q + Psi22 itself becomes numerically rank deficient (its condition
/// number grows like exp(2 h sqrt(||G|| ||M||)) even though the limit of the
/// map is benign), so the step is split into 2^k equal sub-steps sized to
/// keep that growth factor modest; the map composes exactly, so splitting
/// changes nothing in exact arithmetic.
/// The exponential is cached and reused while (A, G, M, h) stay bitwise
/// identical, so constant-coefficient stretches pay for one exponential.
class RiccatiStepper {
 public:
  Matrix step(const Matrix& A, const Matrix& G, const Matrix& M, double h, const Matrix& Q);

 private:
  Matrix scaled_hamiltonian_;
  Matrix psi_;
  bool cached_ = false;
};

inline Matrix symmetrized(const Matrix& X) { return 0.5 * (X + X.transpose()); }

/// Relative jitter added on a failed Cholesky retry: 1e-12 * trace / n.
double spd_jitter(const Matrix& P);

/// Cholesky factorization with one jitter retry; throws
/// NotPositiveDefiniteError if the retried factorization also fails.
Eigen::LLT<Matrix> cholesky_spd(const Matrix& P, const char* label = "matrix");

/// log det of a symmetric positive definite matrix via Cholesky (jitter retry).
double ldet(const Matrix& P, const char* label = "matrix");

/// Inverse of an SPD matrix via Cholesky solve (jitter retry).
Matrix spd_inverse(const Matrix& P, const char* label = "matrix");

/// log det of a general square matrix known to have positive determinant
/// (such as I + Q Delta with Q SPD and Delta PSD). Uses partial-pivot LU and
/// throws NumericalConsistencyError if the determinant sign is not positive.
double ldet_positive_product(const Matrix& M, const char* label = "matrix");

/// Numerical rank with a relative singular-value tolerance (1e-9 of the
/// largest singular value). Zero matrix has rank 0.
Eigen::Index numerical_rank(const Matrix& M, double rel_tol = 1e-9);

}  // namespace infoplan
