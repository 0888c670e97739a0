#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "infoplan/mi.hpp"
#include "infoplan/oracle.hpp"
#include "support.hpp"

using namespace infoplan;
using testsupport::max_abs_diff;
using testsupport::random_readout;
using testsupport::random_sensing;
using testsupport::random_stable_system;

namespace {

LinearGaussianSystem scalar_system(double a, double g, double p0) {
  LinearGaussianSystem sys;
  sys.A = MatrixPoly::constant(Matrix::Constant(1, 1, a));
  sys.B = MatrixPoly::constant(Matrix::Identity(1, 1));
  sys.sigma_w = Matrix::Constant(1, 1, g);
  sys.mu0 = Vector::Zero(1);
  sys.P0 = Matrix::Constant(1, 1, p0);
  return sys;
}

}  // namespace

TEST_CASE("discretized gaps match the scalar closed forms") {
  const double a = -0.7;
  const double g = 0.9;
  const auto sys = scalar_system(a, g, 1.0);
  const auto model = oracle::build_discrete_model(sys, {0.0, 0.5, 1.25}, 1e-3);

  REQUIRE(model.times.size() == 3);
  REQUIRE(model.phi.size() == 2);
  CHECK(model.phi[0](0, 0) == doctest::Approx(std::exp(a * 0.5)).epsilon(1e-10));
  CHECK(model.phi[1](0, 0) == doctest::Approx(std::exp(a * 0.75)).epsilon(1e-10));
  const auto qd_exact = [&](double gap) {
    return g * (std::exp(2.0 * a * gap) - 1.0) / (2.0 * a);
  };
  CHECK(model.qd[0](0, 0) == doctest::Approx(qd_exact(0.5)).epsilon(1e-10));
  CHECK(model.qd[1](0, 0) == doctest::Approx(qd_exact(0.75)).epsilon(1e-10));
}

TEST_CASE("per-gap noise equals the covariance grown from nothing") {
  const auto sys = random_stable_system(13, {.n_x = 3});
  const auto model = oracle::build_discrete_model(sys, {0.0, 0.8}, 1e-3);
  const TimeGrid grid(0.0, 0.8, 1e-4);
  const MatrixTrajectory grown = lyapunov_forward(sys, Matrix::Zero(3, 3), grid);
  CHECK(max_abs_diff(model.qd[0], grown.back()) < 1e-9);
}

TEST_CASE("joint covariance of Brownian readouts matches by hand") {
  const auto sys = scalar_system(0.0, 1.0, 1.0);
  std::vector<oracle::Query> queries;
  queries.push_back({1.0, Matrix::Identity(1, 1), Matrix()});
  queries.push_back({2.0, Matrix::Identity(1, 1), Matrix()});
  const auto model = oracle::build_discrete_model(sys, {0.0, 1.0, 2.0}, 1e-3);
  const auto joint = oracle::joint_covariance(model, queries);

  REQUIRE(joint.sigma.rows() == 2);
  Matrix expected(2, 2);
  expected << 2.0, 2.0, 2.0, 3.0;
  CHECK(max_abs_diff(joint.sigma, expected) < 1e-9);
  CHECK(joint.offsets == std::vector<Eigen::Index>{0, 1});

  SUBCASE("sampling noise lands on the diagonal block only") {
    queries[0].noise = Matrix::Constant(1, 1, 0.5);
    const auto noisy = oracle::joint_covariance(model, queries);
    CHECK(noisy.sigma(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(noisy.sigma(0, 1) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("query times must be events") {
    queries[0].t = 0.9;
    CHECK_THROWS_AS(oracle::joint_covariance(model, queries), ConfigError);
  }
  SUBCASE("queries must be sorted") {
    std::swap(queries[0], queries[1]);
    CHECK_THROWS_AS(oracle::joint_covariance(model, queries), ConfigError);
  }
}

TEST_CASE("sampled information for a static state is spacing-independent") {
  auto sys = scalar_system(0.0, 1e-8, 2.0);
  SensingModel sensing;
  sensing.C = MatrixPoly::constant(Matrix::Identity(1, 1));
  sensing.sigma_n = Matrix::Constant(1, 1, 0.5);
  const auto spec = VerificationSpec::point(MatrixPoly::constant(Matrix::Identity(1, 1)), 1.2);

  const double coarse =
      oracle::brute_mi(sys, sensing, spec, 1.0, {.dt = 0.25, .m_samples = 1});
  const double fine =
      oracle::brute_mi(sys, sensing, spec, 1.0, {.dt = 0.05, .m_samples = 1});
  CHECK(coarse == doctest::Approx(0.5 * std::log(5.0)).epsilon(1e-6));
  CHECK(coarse == doctest::Approx(fine).epsilon(1e-7));
}

TEST_CASE("sampled information converges to the windowed value as dt shrinks") {
  const auto sys = random_stable_system(29, {.n_x = 2});
  const auto sensing = random_sensing(29, 2, 1);
  const auto spec =
      VerificationSpec::window(MatrixPoly::constant(random_readout(29, 1, 2)), 0.8, 1.2);
  const double reference = mi_windowed(sys, sensing, spec, 0.6, {.step = 1e-3}).total_mi;
  REQUIRE(reference > 1e-4);

  const double coarse = oracle::brute_mi(sys, sensing, spec, 0.6,
                                         {.dt = 5e-3, .m_samples = 80, .exp_substep = 2e-3});
  const double fine = oracle::brute_mi(sys, sensing, spec, 0.6,
                                       {.dt = 2.5e-3, .m_samples = 80, .exp_substep = 2e-3});
  const double err_coarse = std::abs(coarse - reference) / reference;
  const double err_fine = std::abs(fine - reference) / reference;
  CHECK(err_fine < err_coarse);
  CHECK(err_fine < 0.01);
  // Sampled measurements can only lose information relative to the
  // continuous path.
  CHECK(coarse <= reference + 1e-9);
  CHECK(fine <= reference + 1e-9);
}

TEST_CASE("verification sample layout covers the window inclusively") {
  const auto wspec =
      VerificationSpec::window(MatrixPoly::constant(Matrix::Identity(1, 2)), 1.0, 2.0);
  const auto five = oracle::verification_samples(wspec, 5);
  REQUIRE(five.size() == 5);
  CHECK(five.front().t == 1.0);
  CHECK(five[2].t == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(five.back().t == 2.0);
  for (const auto& q : five) {
    CHECK(q.noise.size() == 0);
    CHECK(q.selector.rows() == 1);
  }

  const auto one = oracle::verification_samples(wspec, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.front().t == 1.0);

  const auto pspec =
      VerificationSpec::point(MatrixPoly::constant(Matrix::Identity(1, 2)), 1.5);
  const auto point_samples = oracle::verification_samples(pspec, 300);
  REQUIRE(point_samples.size() == 1);
  CHECK(point_samples.front().t == 1.5);

  CHECK_THROWS_AS(oracle::verification_samples(wspec, 0), ConfigError);
}

TEST_CASE("sampled-information options are validated") {
  const auto sys = scalar_system(-0.5, 1.0, 1.0);
  SensingModel sensing;
  sensing.C = MatrixPoly::constant(Matrix::Identity(1, 1));
  sensing.sigma_n = Matrix::Identity(1, 1);
  const auto spec = VerificationSpec::point(MatrixPoly::constant(Matrix::Identity(1, 1)), 1.0);

  CHECK_THROWS_AS(oracle::brute_mi(sys, sensing, spec, 0.0, {.dt = 0.1}), ConfigError);
  // dt must divide tau.
  CHECK_THROWS_AS(oracle::brute_mi(sys, sensing, spec, 1.0, {.dt = 0.3}), ConfigError);
  CHECK_THROWS_AS(oracle::build_discrete_model(sys, {0.0, 1.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(oracle::build_discrete_model(sys, {-0.5, 1.0}, 1e-3), ConfigError);
}
