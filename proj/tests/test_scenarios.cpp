#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "infoplan/chain.hpp"
#include "infoplan/scenarios.hpp"
#include "support.hpp"

using namespace infoplan;
using testsupport::max_abs_diff;
using testsupport::min_eigenvalue;

TEST_CASE("seeded covariance has the requested standard deviations exactly") {
  Vector scales(4);
  scales << 1.0, 2.0, 3.0, 0.5;
  const Matrix P = seeded_spd(4, 99, scales);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(P(i, i) == doctest::Approx(scales(i) * scales(i)).epsilon(1e-14));
  }
  CHECK(min_eigenvalue(P) > 0.0);
  CHECK(max_abs_diff(P, P.transpose()) == 0.0);
  CHECK(max_abs_diff(P, seeded_spd(4, 99, scales)) == 0.0);
  CHECK(max_abs_diff(P, seeded_spd(4, 100, scales)) > 1e-3);
}

TEST_CASE("uniform field tendency reduces to forcing minus value in the interior") {
  LorenzParams params;
  const Matrix uniform = Matrix::Constant(params.l_i, params.l_j, 2.0);
  const Matrix rhs = lorenz2003_rhs(uniform, params);
  for (int i = 0; i < params.l_i; ++i) {
    CHECK(rhs(i, 8) == doctest::Approx(params.phi0 - 2.0).epsilon(1e-12));
  }
  // Wall ghosts (3 below, 0 above) break the cancellation near the edges.
  CHECK(std::abs(rhs(0, 0) - (params.phi0 - 2.0)) > 1e-3);
  CHECK(std::abs(rhs(0, params.l_j - 1) - (params.phi0 - 2.0)) > 1e-3);
}

TEST_CASE("windowed tendency Jacobian matches central differences") {
  LorenzParams params;
  const Matrix base = lorenz2003_spin_up(params, 5, 300, 0.01);
  const int i0 = 30, j0 = 7, wi = 4, wj = 3;
  const Matrix jac = lorenz2003_jacobian_window(base, params, i0, j0, wi, wj);
  REQUIRE(jac.rows() == wi * wj);
  REQUIRE(jac.cols() == wi * wj);

  const double eps = 1e-5;
  for (int y = 0; y < wj; ++y) {
    for (int x = 0; x < wi; ++x) {
      const int col = y * wi + x;
      Matrix plus = base;
      Matrix minus = base;
      plus(i0 + x, j0 + y) += eps;
      minus(i0 + x, j0 + y) -= eps;
      const Matrix dplus = lorenz2003_rhs(plus, params);
      const Matrix dminus = lorenz2003_rhs(minus, params);
      for (int yy = 0; yy < wj; ++yy) {
        for (int xx = 0; xx < wi; ++xx) {
          const double fd =
              (dplus(i0 + xx, j0 + yy) - dminus(i0 + xx, j0 + yy)) / (2.0 * eps);
          CHECK(jac(yy * wi + xx, col) == doctest::Approx(fd).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("spin-up is deterministic and lands on a structured field") {
  LorenzParams params;
  const Matrix a = lorenz2003_spin_up(params, 11, 400, 0.01);
  const Matrix b = lorenz2003_spin_up(params, 11, 400, 0.01);
  CHECK(max_abs_diff(a, b) == 0.0);
  CHECK(a.allFinite());
  const double mean = a.mean();
  const double sd = std::sqrt((a.array() - mean).square().mean());
  CHECK(sd > 0.5);  // not collapsed to a uniform state
}

TEST_CASE("kernel interpolation is exact at the nodes") {
  const std::vector<Eigen::Vector2d> nodes{{0.0, 0.0}, {1.0, 0.0}, {0.5, 1.0}};
  const KernelField field(nodes, 0.8, 0.6);
  for (Eigen::Index k = 0; k < field.size(); ++k) {
    const Matrix row = field.row(nodes[static_cast<std::size_t>(k)]);
    Matrix unit = Matrix::Zero(1, field.size());
    unit(0, k) = 1.0;
    CHECK(max_abs_diff(row, unit) < 1e-10);
  }

  SUBCASE("row gradient matches central differences") {
    const Eigen::Vector2d r(0.4, 0.3);
    const auto [gx, gy] = field.row_gradient(r);
    const double eps = 1e-6;
    const Matrix fx = (field.row(r + Eigen::Vector2d(eps, 0.0)) -
                       field.row(r - Eigen::Vector2d(eps, 0.0))) /
                      (2.0 * eps);
    const Matrix fy = (field.row(r + Eigen::Vector2d(0.0, eps)) -
                       field.row(r - Eigen::Vector2d(0.0, eps))) /
                      (2.0 * eps);
    CHECK(max_abs_diff(gx.transpose(), fx) < 1e-6);
    CHECK(max_abs_diff(gy.transpose(), fy) < 1e-6);
  }
}

TEST_CASE("tracking scenario wires the kinematic chains and priors") {
  SingerConfig config;
  config.n_targets = 2;
  config.n_sensors = 6;
  const SingerScenario scenario(config);
  const auto& sys = scenario.system();
  REQUIRE(sys.n_x() == 12);

  const Matrix A = sys.A(0.0);
  for (int t = 0; t < 2; ++t) {
    for (int axis = 0; axis < 2; ++axis) {
      const int o = 6 * t + 3 * axis;
      CHECK(A(o, o + 1) == 1.0);          // position integrates velocity
      CHECK(A(o + 1, o + 2) == 1.0);      // velocity integrates acceleration
      CHECK(A(o + 2, o + 2) == -config.kappa);
    }
  }
  const Matrix B = sys.B(0.0);
  REQUIRE(B.cols() == 4);
  CHECK(B(2, 0) == 1.0);
  CHECK(B(5, 1) == 1.0);
  CHECK(B(8, 2) == 1.0);
  CHECK(B(11, 3) == 1.0);
  CHECK(max_abs_diff(sys.sigma_w,
                     config.sigma_w * config.sigma_w * Matrix::Identity(4, 4)) == 0.0);
  // Prior standard deviations follow the configured position/velocity/
  // acceleration scales on the diagonal.
  CHECK(sys.P0(0, 0) == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(sys.P0(1, 1) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(sys.P0(2, 2) == doctest::Approx(0.01).epsilon(1e-14));

  SUBCASE("selectors pick one coordinate per target and axis") {
    const Matrix pos = scenario.selector(SingerScenario::Verify::Position);
    REQUIRE(pos.rows() == 4);
    CHECK(pos(0, 0) == 1.0);
    CHECK(pos(1, 3) == 1.0);
    CHECK(pos(2, 6) == 1.0);
    CHECK(pos(3, 9) == 1.0);
    CHECK(pos.sum() == 4.0);
    const Matrix vel = scenario.selector(SingerScenario::Verify::Velocity);
    CHECK(vel(0, 1) == 1.0);
    CHECK(vel.sum() == 4.0);
    const Matrix acc = scenario.selector(SingerScenario::Verify::Acceleration);
    CHECK(acc(0, 2) == 1.0);
  }

  SUBCASE("noise reaches the readouts at the kinematic order") {
    const auto order_of = [&](SingerScenario::Verify kind) {
      const auto spec = scenario.verification(kind);
      return build_chain(sys, spec, 6, default_chain_samples(spec)).K();
    };
    CHECK(order_of(SingerScenario::Verify::Acceleration) == 1);
    CHECK(order_of(SingerScenario::Verify::Velocity) == 2);
    CHECK(order_of(SingerScenario::Verify::Position) == 3);
  }

  SUBCASE("pseudo-range rows follow the nominal geometry") {
    const Matrix row = scenario.pseudo_range_row(1, 0);
    const Eigen::Vector2d l = scenario.sensors()[1];
    const Eigen::Vector2d r = scenario.nominal_targets()[0];
    const double coef = -2.0 * config.alpha / ((r - l).squaredNorm() + config.beta);
    CHECK(row(0, 0) == doctest::Approx(coef * (l.x() - r.x())).epsilon(1e-14));
    CHECK(row(0, 3) == doctest::Approx(coef * (l.y() - r.y())).epsilon(1e-14));
    CHECK(row.cwiseAbs().sum() ==
          doctest::Approx(std::abs(row(0, 0)) + std::abs(row(0, 3))).epsilon(1e-14));

    const auto sensing = scenario.sensing_for({1, 4});
    REQUIRE(sensing.n_z == 4);
    CHECK(max_abs_diff(sensing.C(0.0).row(0), scenario.pseudo_range_row(1, 0)) == 0.0);
    CHECK(max_abs_diff(sensing.C(0.0).row(1), scenario.pseudo_range_row(1, 1)) == 0.0);
    CHECK(max_abs_diff(sensing.C(0.0).row(2), scenario.pseudo_range_row(4, 0)) == 0.0);
    CHECK(max_abs_diff(sensing.sigma_n,
                       config.sigma_n * config.sigma_n * Matrix::Identity(4, 4)) == 0.0);
    CHECK_THROWS_AS(scenario.sensing_for({}), ConfigError);
    CHECK_THROWS_AS(scenario.pseudo_range_row(-1, 0), ConfigError);
    CHECK_THROWS_AS(scenario.pseudo_range_row(0, 5), ConfigError);
  }
}

TEST_CASE("forecast scenario converts hours and reuses the field pieces") {
  WeatherConfig config;
  config.spin_steps = 300;
  const WeatherScenario scenario(config);

  CHECK(scenario.t_i() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(scenario.t_f() == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(scenario.tau() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(scenario.speed() == doctest::Approx(40.0).epsilon(1e-15));

  const auto& sys = scenario.system();
  REQUIRE(sys.n_x() == config.window_wi * config.window_wj);
  const Matrix jac = lorenz2003_jacobian_window(
      scenario.spun_up_field(), config.lorenz, config.window_i, config.window_j,
      config.window_wi, config.window_wj);
  CHECK(max_abs_diff(sys.A(0.123), jac) == 0.0);
  CHECK(max_abs_diff(sys.B(0.0), Matrix::Identity(sys.n_x(), sys.n_x())) == 0.0);
  CHECK(max_abs_diff(sys.sigma_w, config.sigma_w * config.sigma_w *
                                      Matrix::Identity(sys.n_x(), sys.n_x())) == 0.0);

  SUBCASE("verification blends the drifting readout rows") {
    const auto spec = scenario.verification();
    REQUIRE(spec.kind() == VerificationSpec::Kind::Window);
    CHECK(spec.t_start() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(spec.t_end() == doctest::Approx(0.7).epsilon(1e-15));
    Matrix start_rows(2, sys.n_x());
    Matrix end_rows(2, sys.n_x());
    for (int k = 0; k < 2; ++k) {
      start_rows.row(k) = scenario.field().row(config.verify_start[static_cast<std::size_t>(k)]);
      end_rows.row(k) = scenario.field().row(config.verify_end[static_cast<std::size_t>(k)]);
    }
    CHECK(max_abs_diff(spec.mv_at(scenario.t_i(), 0), start_rows) < 1e-12);
    CHECK(max_abs_diff(spec.mv_at(scenario.t_f(), 0), end_rows) < 1e-12);

    const auto mid = scenario.midpoint_verification();
    REQUIRE(mid.kind() == VerificationSpec::Kind::Point);
    CHECK(mid.t_start() == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(max_abs_diff(mid.mv_at(0.6, 0), 0.5 * (start_rows + end_rows)) < 1e-12);
  }

  SUBCASE("sensing reads the kernel interpolation at the platform position") {
    const Eigen::Vector2d fixed(1.2, 0.9);
    const auto fixed_sensing = scenario.sensing_at(fixed);
    CHECK(max_abs_diff(fixed_sensing.C(0.0), scenario.field().row(fixed)) == 0.0);
    CHECK(max_abs_diff(fixed_sensing.C(0.04), scenario.field().row(fixed)) == 0.0);
    CHECK(fixed_sensing.sigma_n(0, 0) ==
          doctest::Approx(config.sigma_n * config.sigma_n).epsilon(1e-15));

    const auto moving = scenario.sensing_along(
        [](double t) { return Eigen::Vector2d(0.5 + 10.0 * t, 0.5); });
    CHECK(max_abs_diff(moving.C(0.02), scenario.field().row(Eigen::Vector2d(0.7, 0.5))) <
          1e-12);
  }
}
