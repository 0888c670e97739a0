#pragma once

#include <functional>
#include <vector>

#include "infoplan/core.hpp"

namespace infoplan {

/// Matrix-valued polynomial in time, coefficients in ascending powers.
/// Differentiation is exact; an empty coefficient list is the zero
/// polynomial (shape preserved).
class MatrixPoly {
 public:
  MatrixPoly() = default;
  explicit MatrixPoly(std::vector<Matrix> coefficients);
  static MatrixPoly constant(Matrix value);
  static MatrixPoly zero(Eigen::Index rows, Eigen::Index cols);
  /// Linear interpolation between value_a at t_a and value_b at t_b.
  static MatrixPoly blend(const Matrix& value_a, const Matrix& value_b, double t_a, double t_b);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  Matrix operator()(double t) const;
  MatrixPoly derivative() const;
  /// Exact derivative of the given order evaluated at t; orders above the
  /// degree give the zero matrix.
  Matrix derivative_at(double t, int order) const;
  MatrixPoly operator+(const MatrixPoly& rhs) const;
  MatrixPoly operator*(const MatrixPoly& rhs) const;

 private:
  std::vector<Matrix> coeffs_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
};

/// dX = A(t) X dt + B(t) dW with process noise intensity Sigma_W, together
/// with the Gaussian initial law (mu0, P0).
struct LinearGaussianSystem {
  MatrixPoly A;    // n_x by n_x
  MatrixPoly B;    // n_x by n_w
  Matrix sigma_w;  // n_w by n_w, SPD
  Vector mu0;      // n_x
  Matrix P0;       // n_x by n_x, SPD

  Eigen::Index n_x() const { return A.rows(); }
  Eigen::Index n_w() const { return B.cols(); }

  /// B(t) Sigma_W B(t)'.
  Matrix noise_gramian(double t) const;
  void validate() const;
};

/// Continuous measurement dZ = C(t) X dt + dN with intensity Sigma_N. The
/// sensing decision (active subset, platform path) is already applied in C.
struct SensingModel {
  Eigen::Index n_z = 0;
  Matrix sigma_n;  // n_z by n_z, SPD
  std::function<Matrix(double)> C;

  static SensingModel none(Eigen::Index n_x);
  void validate(Eigen::Index n_x) const;
};

/// What is to be verified: a linear readout M_V(t) X of the state, either at
/// a single future time or along a closed future window.
class VerificationSpec {
 public:
  enum class Kind { Point, Window };

  /// Default is an empty point readout; usable only after being replaced by
  /// one of the factories (problem structs hold a spec by value).
  VerificationSpec() = default;

  static VerificationSpec point(MatrixPoly mv, double t);
  static VerificationSpec window(MatrixPoly mv, double t_i, double t_f);

  Kind kind() const { return kind_; }
  Eigen::Index n_v() const { return mv_.rows(); }
  const MatrixPoly& mv() const { return mv_; }
  /// Point time, or window start for window specs.
  double t_start() const { return t_i_; }
  double t_end() const { return t_f_; }

  /// Exact time-derivative of M_V of the given order at t.
  Matrix mv_at(double t, int order = 0) const { return mv_.derivative_at(t, order); }

 private:
  VerificationSpec(Kind kind, MatrixPoly mv, double t_i, double t_f);
  Kind kind_ = Kind::Point;
  MatrixPoly mv_;
  double t_i_ = 0.0;
  double t_f_ = 0.0;
};

/// State transition of the system's drift from t1 to t2.
Matrix state_transition(const LinearGaussianSystem& system, double t1, double t2, double step);

}  // namespace infoplan
