#include "infoplan/system.hpp"

namespace infoplan {

MatrixPoly::MatrixPoly(std::vector<Matrix> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) {
    throw ConfigError("matrix polynomial needs at least one coefficient; use zero()");
  }
  rows_ = coeffs_.front().rows();
  cols_ = coeffs_.front().cols();
  for (const auto& c : coeffs_) {
    if (c.rows() != rows_ || c.cols() != cols_) {
      throw ConfigError("matrix polynomial coefficients differ in shape");
    }
  }
  while (coeffs_.size() > 1 && coeffs_.back().isZero(0.0)) {
    coeffs_.pop_back();
  }
}

MatrixPoly MatrixPoly::constant(Matrix value) {
  std::vector<Matrix> c;
  c.push_back(std::move(value));
  return MatrixPoly(std::move(c));
}

MatrixPoly MatrixPoly::zero(Eigen::Index rows, Eigen::Index cols) {
  MatrixPoly p;
  p.rows_ = rows;
  p.cols_ = cols;
  return p;
}

MatrixPoly MatrixPoly::blend(const Matrix& value_a, const Matrix& value_b, double t_a,
                             double t_b) {
  if (t_b == t_a) return MatrixPoly::constant(value_a);
  const double inv = 1.0 / (t_b - t_a);
  std::vector<Matrix> c(2);
  c[0] = (t_b * value_a - t_a * value_b) * inv;
  c[1] = (value_b - value_a) * inv;
  return MatrixPoly(std::move(c));
}

Matrix MatrixPoly::operator()(double t) const {
  if (coeffs_.empty()) return Matrix::Zero(rows_, cols_);
  Matrix out = coeffs_.back();
  for (auto i = coeffs_.size(); i-- > 1;) {
    out = out * t + coeffs_[i - 1];
  }
  return out;
}

MatrixPoly MatrixPoly::derivative() const {
  if (coeffs_.size() <= 1) return MatrixPoly::zero(rows_, cols_);
  std::vector<Matrix> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) {
    d[k - 1] = static_cast<double>(k) * coeffs_[k];
  }
  return MatrixPoly(std::move(d));
}

Matrix MatrixPoly::derivative_at(double t, int order) const {
  if (order < 0) throw ConfigError("derivative order must be nonnegative");
  if (order > degree()) return Matrix::Zero(rows_, cols_);
  MatrixPoly p = *this;
  for (int i = 0; i < order; ++i) p = p.derivative();
  return p(t);
}

MatrixPoly MatrixPoly::operator+(const MatrixPoly& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
    throw ConfigError("matrix polynomial shapes differ in addition");
  }
  std::vector<Matrix> c(std::max(coeffs_.size(), rhs.coeffs_.size()),
                        Matrix::Zero(rows_, cols_));
  if (c.empty()) return MatrixPoly::zero(rows_, cols_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) c[k] += rhs.coeffs_[k];
  return MatrixPoly(std::move(c));
}

MatrixPoly MatrixPoly::operator*(const MatrixPoly& rhs) const {
  if (cols_ != rhs.rows_) {
    throw ConfigError("matrix polynomial shapes do not chain in product");
  }
  if (coeffs_.empty() || rhs.coeffs_.empty()) return MatrixPoly::zero(rows_, rhs.cols_);
  std::vector<Matrix> c(coeffs_.size() + rhs.coeffs_.size() - 1,
                        Matrix::Zero(rows_, rhs.cols_));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) {
      c[i + j] += coeffs_[i] * rhs.coeffs_[j];
    }
  }
  return MatrixPoly(std::move(c));
}

Matrix LinearGaussianSystem::noise_gramian(double t) const {
  const Matrix Bt = B(t);
  return Bt * sigma_w * Bt.transpose();
}

void LinearGaussianSystem::validate() const {
  const Eigen::Index n = n_x();
  if (A.rows() != A.cols()) throw ConfigError("A must be square");
  if (B.rows() != n) throw ConfigError("B row count must match the state dimension");
  if (sigma_w.rows() != n_w() || sigma_w.cols() != n_w()) {
    throw ConfigError("Sigma_W must be n_w by n_w");
  }
  if (mu0.size() != n) throw ConfigError("mu0 length must match the state dimension");
  if (P0.rows() != n || P0.cols() != n) throw ConfigError("P0 must be n_x by n_x");
  if (!sigma_w.isApprox(sigma_w.transpose(), 1e-12)) {
    throw ConfigError("Sigma_W must be symmetric");
  }
  if (!P0.isApprox(P0.transpose(), 1e-12)) throw ConfigError("P0 must be symmetric");
  cholesky_spd(sigma_w, "Sigma_W");
  cholesky_spd(P0, "P0");
}

SensingModel SensingModel::none(Eigen::Index n_x) {
  SensingModel m;
  m.n_z = 1;
  m.sigma_n = Matrix::Identity(1, 1);
  m.C = [n_x](double) { return Matrix::Zero(1, n_x); };
  return m;
}

void SensingModel::validate(Eigen::Index n_x) const {
  if (!C) throw ConfigError("sensing model has no C");
  if (sigma_n.rows() != n_z || sigma_n.cols() != n_z) {
    throw ConfigError("Sigma_N must be n_z by n_z");
  }
  cholesky_spd(sigma_n, "Sigma_N");
  const Matrix C0 = C(0.0);
  if (C0.rows() != n_z || C0.cols() != n_x) {
    throw ConfigError("C(t) must be n_z by n_x");
  }
}

VerificationSpec::VerificationSpec(Kind kind, MatrixPoly mv, double t_i, double t_f)
    : kind_(kind), mv_(std::move(mv)), t_i_(t_i), t_f_(t_f) {
  if (mv_.rows() == 0 || mv_.cols() == 0) {
    throw ConfigError("verification matrix must be nonempty");
  }
}

VerificationSpec VerificationSpec::point(MatrixPoly mv, double t) {
  if (!(t > 0.0)) throw ConfigError("verification time must be positive");
  return VerificationSpec(Kind::Point, std::move(mv), t, t);
}

VerificationSpec VerificationSpec::window(MatrixPoly mv, double t_i, double t_f) {
  if (!(t_i > 0.0)) throw ConfigError("verification window must start after time zero");
  if (t_f < t_i) throw ConfigError("verification window end precedes start");
  return VerificationSpec(Kind::Window, std::move(mv), t_i, t_f);
}

Matrix state_transition(const LinearGaussianSystem& system, double t1, double t2,
                        double step) {
  return state_transition([&system](double t) { return system.A(t); }, system.n_x(), t1, t2,
                          step);
}

}  // namespace infoplan
