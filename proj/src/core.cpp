#include "infoplan/core.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace infoplan {

namespace {

std::string format_time(double t) {
  std::ostringstream os;
  os.precision(12);
  os << t;
  return os.str();
}

void check_finite(const Matrix& X, double t) {
  if (!X.allFinite()) {
    throw DivergenceError("integration produced non-finite values at t = " + format_time(t));
  }
}

}  // namespace

TimeGrid::TimeGrid(double t_start, double t_end, double step)
    : t_start_(t_start), t_end_(t_end), step_(step) {
  if (!(step > 0.0)) {
    throw ConfigError("time grid step must be positive");
  }
  if (t_end < t_start) {
    throw ConfigError("time grid end precedes start");
  }
  const double span = t_end - t_start;
  const double raw = span / step;
  const auto rounded = static_cast<std::size_t>(std::llround(raw));
  if (std::abs(static_cast<double>(rounded) * step - span) > 1e-9 * std::max(1.0, span)) {
    std::ostringstream os;
    os << "step " << step << " does not divide the span [" << t_start << ", " << t_end << "]";
    throw ConfigError(os.str());
  }
  steps_ = rounded;
}

double TimeGrid::node(std::size_t i) const {
  if (i == steps_) return t_end_;
  return t_start_ + static_cast<double>(i) * step_;
}

std::size_t TimeGrid::node_index(double t) const {
  const double raw = (t - t_start_) / step_;
  const auto i = static_cast<long long>(std::llround(raw));
  if (i < 0 || static_cast<std::size_t>(i) > steps_ ||
      std::abs(raw - static_cast<double>(i)) > 1e-9) {
    throw ConfigError("time " + format_time(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(i);
}

MatrixTrajectory::MatrixTrajectory(TimeGrid grid, std::vector<Matrix> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count()) {
    throw ConfigError("trajectory value count does not match grid nodes");
  }
}

Matrix MatrixTrajectory::at_time(double t) const {
  const double lo = grid_.t_start();
  const double hi = grid_.t_end();
  if (t <= lo) return values_.front();
  if (t >= hi) return values_.back();
  const double raw = (t - lo) / grid_.step();
  auto i = static_cast<std::size_t>(raw);
  if (i >= grid_.step_count()) i = grid_.step_count() - 1;
  const double w = raw - static_cast<double>(i);
  if (w <= 0.0) return values_[i];
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

Matrix rk4_step(const MatrixRhs& rhs, double t, const Matrix& X, double h) {
  const Matrix k1 = rhs(t, X);
  const Matrix k2 = rhs(t + 0.5 * h, X + (0.5 * h) * k1);
  const Matrix k3 = rhs(t + 0.5 * h, X + (0.5 * h) * k2);
  const Matrix k4 = rhs(t + h, X + h * k3);
  return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

MatrixTrajectory integrate_matrix_ode(const MatrixRhs& rhs, const Matrix& X_at_start,
                                      const TimeGrid& grid, Direction direction,
                                      const IntegrateOptions& options) {
  const std::size_t n_nodes = grid.node_count();
  std::vector<Matrix> values(n_nodes);
  const bool forward = direction == Direction::Forward;
  const double h = forward ? grid.step() : -grid.step();

  Matrix X = options.symmetrize ? symmetrized(X_at_start) : X_at_start;
  check_finite(X, forward ? grid.t_start() : grid.t_end());

  std::size_t idx = forward ? 0 : n_nodes - 1;
  values[idx] = X;
  for (std::size_t s = 0; s < grid.step_count(); ++s) {
    const double t = grid.node(forward ? s : grid.step_count() - s);
    X = rk4_step(rhs, t, X, h);
    if (options.symmetrize) X = symmetrized(X);
    idx = forward ? idx + 1 : idx - 1;
    check_finite(X, grid.node(idx));
    values[idx] = X;
  }
  return MatrixTrajectory(grid, std::move(values));
}

std::pair<MatrixTrajectory, MatrixTrajectory> integrate_matrix_ode_pair(
    const MatrixPairRhs& rhs, const Matrix& X0, const Matrix& Y0, const TimeGrid& grid,
    Direction direction, const IntegrateOptions& options) {
  const std::size_t n_nodes = grid.node_count();
  std::vector<Matrix> xs(n_nodes), ys(n_nodes);
  const bool forward = direction == Direction::Forward;
  const double h = forward ? grid.step() : -grid.step();

  Matrix X = options.symmetrize ? symmetrized(X0) : X0;
  Matrix Y = options.symmetrize ? symmetrized(Y0) : Y0;

  std::size_t idx = forward ? 0 : n_nodes - 1;
  check_finite(X, grid.node(idx));
  check_finite(Y, grid.node(idx));
  xs[idx] = X;
  ys[idx] = Y;
  for (std::size_t s = 0; s < grid.step_count(); ++s) {
    const double t = grid.node(forward ? s : grid.step_count() - s);
    const auto [kx1, ky1] = rhs(t, X, Y);
    const auto [kx2, ky2] = rhs(t + 0.5 * h, X + (0.5 * h) * kx1, Y + (0.5 * h) * ky1);
    const auto [kx3, ky3] = rhs(t + 0.5 * h, X + (0.5 * h) * kx2, Y + (0.5 * h) * ky2);
    const auto [kx4, ky4] = rhs(t + h, X + h * kx3, Y + h * ky3);
    X += (h / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    Y += (h / 6.0) * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    if (options.symmetrize) {
      X = symmetrized(X);
      Y = symmetrized(Y);
    }
    idx = forward ? idx + 1 : idx - 1;
    check_finite(X, grid.node(idx));
    check_finite(Y, grid.node(idx));
    xs[idx] = X;
    ys[idx] = Y;
  }
  return {MatrixTrajectory(grid, std::move(xs)), MatrixTrajectory(grid, std::move(ys))};
}

Matrix state_transition(const std::function<Matrix(double)>& A, Eigen::Index n, double t1,
                        double t2, double step) {
  Matrix Phi = Matrix::Identity(n, n);
  if (t1 == t2) return Phi;
  const double span = std::abs(t2 - t1);
  const auto n_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(std::ceil(span / step - 1e-12))));
  const double h = (t2 - t1) / static_cast<double>(n_steps);
  const MatrixRhs rhs = [&A](double t, const Matrix& X) -> Matrix { return A(t) * X; };
  double t = t1;
  for (std::size_t s = 0; s < n_steps; ++s) {
    Phi = rk4_step(rhs, t, Phi, h);
    t = t1 + static_cast<double>(s + 1) * h;
  }
  check_finite(Phi, t2);
  return Phi;
}

double spd_jitter(const Matrix& P) {
  const auto n = static_cast<double>(P.rows());
  return 1e-12 * P.trace() / n;
}

Eigen::LLT<Matrix> cholesky_spd(const Matrix& P, const char* label) {
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = spd_jitter(P);
  if (jitter > 0.0) {
    Matrix Pj = P + jitter * Matrix::Identity(P.rows(), P.cols());
    llt.compute(Pj);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NotPositiveDefiniteError(std::string(label) +
                                 " is not positive definite (jitter retry failed)");
}

double ldet(const Matrix& P, const char* label) {
  const auto llt = cholesky_spd(P, label);
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Matrix spd_inverse(const Matrix& P, const char* label) {
  const auto llt = cholesky_spd(P, label);
  return llt.solve(Matrix::Identity(P.rows(), P.cols()));
}

double ldet_positive_product(const Matrix& M, const char* label) {
  Eigen::PartialPivLU<Matrix> lu(M);
  const Matrix& U = lu.matrixLU();
  double log_abs = 0.0;
  double sign = lu.permutationP().determinant();  // +1 or -1
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const double d = U(i, i);
    if (d == 0.0) {
      throw NumericalConsistencyError(std::string(label) + " is singular");
    }
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  if (sign <= 0.0) {
    throw NumericalConsistencyError(std::string(label) +
                                    " has a non-positive determinant; expected positive");
  }
  return log_abs;
}

namespace {

double induced_norm1(const Matrix& X) {
  if (X.size() == 0) return 0.0;
  return X.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

Matrix RiccatiStepper::step(const Matrix& A, const Matrix& G, const Matrix& M, double h,
                            const Matrix& Q) {
  const Eigen::Index n = A.rows();
  // Over one step the resolvent Psi21 Q + Psi22 conditions like
  // exp(2 h (||A|| + sqrt(||G|| ||M||))); keep that exponent small by
  // splitting into equal sub-steps, applying the same fractional map 2^k
  // times. Identical inputs produce identical splits, so caching and
  // bitwise reproducibility across callers are preserved.
  const double rate = induced_norm1(A) + std::sqrt(induced_norm1(G) * induced_norm1(M));
  double sub_h = h;
  std::size_t pieces = 1;
  while (std::abs(sub_h) * rate > 8.0 && pieces < (std::size_t{1} << 24)) {
    sub_h *= 0.5;
    pieces *= 2;
  }
  Matrix hamiltonian(2 * n, 2 * n);
  hamiltonian.topLeftCorner(n, n) = A;
  hamiltonian.topRightCorner(n, n) = G;
  hamiltonian.bottomLeftCorner(n, n) = M;
  hamiltonian.bottomRightCorner(n, n) = -A.transpose();
  hamiltonian *= sub_h;
  const bool same_coeffs =
      cached_ && scaled_hamiltonian_.rows() == hamiltonian.rows() &&
      std::memcmp(scaled_hamiltonian_.data(), hamiltonian.data(),
                  sizeof(double) * static_cast<std::size_t>(hamiltonian.size())) == 0;
  if (!same_coeffs) {
    scaled_hamiltonian_ = hamiltonian;
    psi_ = hamiltonian.exp();
    cached_ = true;
  }
  Matrix current = Q;
  for (std::size_t piece = 0; piece < pieces; ++piece) {
    const Matrix numer = psi_.topLeftCorner(n, n) * current + psi_.topRightCorner(n, n);
    const Matrix denom = psi_.bottomLeftCorner(n, n) * current + psi_.bottomRightCorner(n, n);
    // next = numer * denom^{-1}, solved through the transposed system.
    current = symmetrized(
        denom.transpose().partialPivLu().solve(numer.transpose()).transpose());
  }
  return current;
}

Eigen::Index numerical_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double cut = rel_tol * sv(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++r;
  }
  return r;
}

}  // namespace infoplan
