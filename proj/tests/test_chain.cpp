#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "infoplan/chain.hpp"
#include "support.hpp"

using namespace infoplan;
using testsupport::max_abs_diff;

namespace {

/// Double integrator: position/velocity with white-noise acceleration.
LinearGaussianSystem double_integrator(double accel_intensity) {
  LinearGaussianSystem sys;
  Matrix A(2, 2);
  A << 0.0, 1.0, 0.0, 0.0;
  sys.A = MatrixPoly::constant(A);
  Matrix B(2, 1);
  B << 0.0, 1.0;
  sys.B = MatrixPoly::constant(B);
  sys.sigma_w = Matrix::Constant(1, 1, accel_intensity);
  sys.mu0 = Vector::Zero(2);
  sys.P0 = Matrix::Identity(2, 2);
  return sys;
}

VerificationSpec window_of(const Matrix& mv, double t_i, double t_f) {
  return VerificationSpec::window(MatrixPoly::constant(mv), t_i, t_f);
}

}  // namespace

TEST_CASE("position readout of a double integrator couples to noise at order two") {
  const auto sys = double_integrator(0.36);
  const auto spec = window_of((Matrix(1, 2) << 1.0, 0.0).finished(), 1.0, 2.0);
  const auto chain = build_chain(sys, spec, 6, default_chain_samples(spec));

  CHECK(chain.K() == 2);
  CHECK(chain.n_v() == 1);
  CHECK(max_abs_diff(chain.h_at(0, 1.3), (Matrix(1, 2) << 1.0, 0.0).finished()) == 0.0);
  CHECK(max_abs_diff(chain.h_at(1, 1.3), (Matrix(1, 2) << 0.0, 1.0).finished()) == 0.0);
  CHECK(max_abs_diff(chain.h_at(2, 1.3), Matrix::Zero(1, 2)) == 0.0);

  // Noise intensity of the K-th derivative is the acceleration intensity.
  CHECK(chain.rbar(1.5)(0, 0) == doctest::Approx(0.36).epsilon(1e-14));
  // H_K = 0 leaves the drift untouched.
  CHECK(max_abs_diff(chain.abar(1.5), sys.A(1.5)) == 0.0);
  // The single noise channel is fully absorbed by the readout derivative.
  CHECK(max_abs_diff(chain.qbar(1.5), Matrix::Zero(1, 1)) < 1e-15);
  CHECK(max_abs_diff(chain.gbar(1.5), (Matrix(2, 1) << 0.0, 1.0).finished()) < 1e-15);
  // Pinned stack H_0, H_1 is the identity: position and velocity both pinned.
  CHECK(max_abs_diff(chain.hstack(1.5), Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("velocity readout of a double integrator couples to noise at order one") {
  const auto sys = double_integrator(0.36);
  const auto spec = window_of((Matrix(1, 2) << 0.0, 1.0).finished(), 1.0, 2.0);
  const auto chain = build_chain(sys, spec, 6, default_chain_samples(spec));

  CHECK(chain.K() == 1);
  CHECK(chain.rbar(1.5)(0, 0) == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(max_abs_diff(chain.hstack(1.5), (Matrix(1, 2) << 0.0, 1.0).finished()) == 0.0);
}

TEST_CASE("full-state readout with a single noise channel is rejected") {
  const auto sys = double_integrator(0.36);
  const auto spec = window_of(Matrix::Identity(2, 2), 1.0, 2.0);
  CHECK_THROWS_AS(build_chain(sys, spec, 6, default_chain_samples(spec)),
                  AssumptionViolationError);
}

TEST_CASE("readout that noise never reaches is rejected at the order cap") {
  LinearGaussianSystem sys;
  sys.A = MatrixPoly::constant(Matrix::Zero(3, 3));
  Matrix B(3, 1);
  B << 0.0, 0.0, 1.0;
  sys.B = MatrixPoly::constant(B);
  sys.sigma_w = Matrix::Identity(1, 1);
  sys.mu0 = Vector::Zero(3);
  sys.P0 = Matrix::Identity(3, 3);
  const auto spec = window_of((Matrix(1, 3) << 1.0, 0.0, 0.0).finished(), 1.0, 2.0);
  CHECK_THROWS_AS(build_chain(sys, spec, 4, default_chain_samples(spec)),
                  AssumptionViolationError);
}

TEST_CASE("rows reaching noise at different orders are rejected") {
  LinearGaussianSystem sys;
  sys.A = MatrixPoly::constant(Matrix::Zero(3, 3));
  Matrix B(3, 1);
  B << 0.0, 0.0, 1.0;
  sys.B = MatrixPoly::constant(B);
  sys.sigma_w = Matrix::Identity(1, 1);
  sys.mu0 = Vector::Zero(3);
  sys.P0 = Matrix::Identity(3, 3);
  Matrix mv(2, 3);
  mv << 0.0, 0.0, 1.0,  // couples at order one
      1.0, 0.0, 0.0;    // never couples
  const auto spec = window_of(mv, 1.0, 2.0);
  CHECK_THROWS_AS(build_chain(sys, spec, 4, default_chain_samples(spec)),
                  AssumptionViolationError);
}

TEST_CASE("coupling rank that changes across the window is rejected") {
  LinearGaussianSystem sys;
  sys.A = MatrixPoly::constant(Matrix::Zero(2, 2));
  Matrix B(2, 1);
  B << 1.0, 0.0;
  sys.B = MatrixPoly::constant(B);
  sys.sigma_w = Matrix::Identity(1, 1);
  sys.mu0 = Vector::Zero(2);
  sys.P0 = Matrix::Identity(2, 2);
  // Readout weight (t - 1.5) vanishes at the window midpoint sample.
  const MatrixPoly mv({(Matrix(1, 2) << -1.5, 0.0).finished(),
                       (Matrix(1, 2) << 1.0, 0.0).finished()});
  const auto spec = VerificationSpec::window(mv, 1.0, 2.0);
  CHECK_THROWS_AS(build_chain(sys, spec, 4, default_chain_samples(spec)),
                  AssumptionViolationError);
}

TEST_CASE("time-varying readout differentiates through the weights") {
  LinearGaussianSystem sys;
  Matrix A(2, 2);
  A << 0.0, 1.0, 0.0, 0.0;
  sys.A = MatrixPoly::constant(A);
  Matrix B(2, 1);
  B << 0.0, 1.0;
  sys.B = MatrixPoly::constant(B);
  sys.sigma_w = Matrix::Identity(1, 1);
  sys.mu0 = Vector::Zero(2);
  sys.P0 = Matrix::Identity(2, 2);
  // M_V(t) = [t, 1]: the velocity weight couples immediately.
  const MatrixPoly mv({(Matrix(1, 2) << 0.0, 1.0).finished(),
                       (Matrix(1, 2) << 1.0, 0.0).finished()});
  const auto spec = VerificationSpec::window(mv, 1.0, 2.0);
  const auto chain = build_chain(sys, spec, 4, default_chain_samples(spec));

  CHECK(chain.K() == 1);
  CHECK(max_abs_diff(chain.h_at(0, 2.0), (Matrix(1, 2) << 2.0, 1.0).finished()) == 0.0);
  // H_1 = dM_V/dt + M_V A = [1, 0] + [0, t] = [1, t].
  CHECK(max_abs_diff(chain.h_at(1, 2.0), (Matrix(1, 2) << 1.0, 2.0).finished()) == 0.0);
}

TEST_CASE("noise coupling rank counts independent noise channels") {
  const Matrix B = (Matrix(2, 1) << 0.0, 1.0).finished();
  const Matrix sigma = Matrix::Constant(1, 1, 0.36);
  CHECK(rank_of_noise_coupling((Matrix(1, 2) << 0.0, 1.0).finished(), B, sigma) == 1);
  CHECK(rank_of_noise_coupling((Matrix(1, 2) << 1.0, 0.0).finished(), B, sigma) == 0);
  CHECK(rank_of_noise_coupling(Matrix::Identity(2, 2), B, sigma) == 1);
}

TEST_CASE("default chain samples span the window inclusively") {
  const auto spec = window_of(Matrix::Identity(1, 1), 1.0, 2.0);
  const auto samples = default_chain_samples(spec);
  REQUIRE(samples.size() == 9);
  CHECK(samples.front() == 1.0);
  CHECK(samples.back() == 2.0);
  CHECK(samples[4] == doctest::Approx(1.5).epsilon(1e-15));

  const auto point = VerificationSpec::point(MatrixPoly::constant(Matrix::Identity(1, 1)), 3.0);
  const auto point_samples = default_chain_samples(point);
  REQUIRE(point_samples.size() == 1);
  CHECK(point_samples.front() == 3.0);
}
