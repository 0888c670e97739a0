#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include <json.hpp>

#include "infoplan/config.hpp"
#include "infoplan/mi.hpp"

using namespace infoplan;
using nlohmann::json;

namespace {

std::string config_error_message(const json& j) {
  try {
    (void)parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

json literal_scalar() {
  return json::parse(R"({
    "scenario": {
      "name": "literal",
      "a": [[-1.0]],
      "b": [[1.0]],
      "sigma_w": [[1.0]],
      "p0": [[2.0]],
      "sensing": {"c": [[1.0]], "sigma_n": [[0.5]]},
      "spec": {"kind": "point", "t": 1.0, "mv": [[1.0]]},
      "tau": 0.5
    }
  })");
}

}  // namespace

TEST_CASE("an empty config resolves to the documented defaults") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.scenario == ScenarioKind::Singer);
  CHECK(c.solver.step == 1e-3);
  CHECK(c.solver.chain_k_max == 6);
  CHECK(c.singer.n_sensors == 20);
  CHECK(c.singer.active_size == 5);
  CHECK(c.singer.tau == 2.5);
  CHECK(c.singer_verify == SingerScenario::Verify::Velocity);
  CHECK(c.plan.search == ScheduleSearch::Exhaustive);
  CHECK(c.plan.multistart == 36);
  CHECK_FALSE(c.plan.compare_strategies);
  CHECK(c.field.x.count == 31);
  CHECK(c.oracle.dt_sweep.size() == 3);
}

TEST_CASE("scenario-block seeds override the top-level seed") {
  const RunConfig both = parse_config(json::parse(
      R"({"seed": 42, "scenario": {"name": "singer", "seed": 9}})"));
  CHECK(both.singer.seed == 9);
  CHECK(both.weather.seed == 42);

  const RunConfig top_only = parse_config(json::parse(R"({"seed": 42})"));
  CHECK(top_only.singer.seed == 42);
  CHECK(top_only.weather.seed == 42);
}

TEST_CASE("validation failures name the offending path") {
  const std::string unknown =
      config_error_message(json::parse(R"({"scenario": {"name": "singer", "bogus": 1}})"));
  CHECK(unknown.find("config.scenario") != std::string::npos);
  CHECK(unknown.find("unknown key 'bogus'") != std::string::npos);

  const std::string late_tau = config_error_message(json::parse(
      R"({"scenario": {"name": "singer", "t_i": 1.0, "t_f": 2.0, "tau": 1.5}})"));
  CHECK(late_tau.find("measurement horizon must end at or before") != std::string::npos);

  const std::string bad_step =
      config_error_message(json::parse(R"({"solver": {"step": -0.1}})"));
  CHECK(bad_step.find("config.solver.step") != std::string::npos);

  const std::string bad_search =
      config_error_message(json::parse(R"({"plan": {"search": "magic"}})"));
  CHECK(bad_search.find("exhaustive, greedy, or cross-exhaustive") != std::string::npos);
}

TEST_CASE("literal scenarios parse into a runnable bundle") {
  const RunConfig c = parse_config(literal_scalar());
  REQUIRE(c.scenario == ScenarioKind::Literal);
  const ScenarioBundle bundle = build_scenario(c);
  REQUIRE(bundle.spec.has_value());
  CHECK(bundle.spec->kind() == VerificationSpec::Kind::Point);
  CHECK(bundle.tau == 0.5);
  CHECK(bundle.system.n_x() == 1);
  const auto report = mi_pointwise_smoother(bundle.system, bundle.sensing,
                                            bundle.verification(), bundle.tau, c.solver);
  CHECK(report.total_mi > 0.0);

  SUBCASE("window specs blend between the two readout matrices") {
    json j = literal_scalar();
    j["scenario"]["spec"] = json::parse(
        R"({"kind": "window", "t_i": 1.0, "t_f": 2.0, "mv": [[1.0]], "mv_end": [[3.0]]})");
    const RunConfig wc = parse_config(j);
    const auto spec = build_scenario(wc).verification();
    CHECK(spec.kind() == VerificationSpec::Kind::Window);
    CHECK(spec.mv_at(1.0, 0)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spec.mv_at(2.0, 0)(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(spec.mv_at(1.5, 0)(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("horizons past the readout are rejected") {
    json j = literal_scalar();
    j["scenario"]["tau"] = 1.5;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  SUBCASE("invalid system matrices are rejected with the path") {
    json j = literal_scalar();
    j["scenario"]["p0"] = json::parse("[[-2.0]]");
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
}

TEST_CASE("scenario bundles expose the pieces planners need") {
  const RunConfig c = parse_config(json::parse(
      R"({"scenario": {"name": "singer", "n_sensors": 6, "active_size": 2}})"));
  const ScenarioBundle bundle = build_scenario(c);
  CHECK(bundle.system.n_x() == 6);
  CHECK(bundle.sensing.n_z == 2);
  CHECK(bundle.verification().t_start() == 3.0);
  CHECK(bundle.tau == 2.5);

  const ScheduleProblem sp = make_schedule_problem(c, bundle);
  CHECK(sp.n_sensors == 6);
  CHECK(sp.subset_size == 2);
  CHECK(sp.n_intervals == 5);
  CHECK(sp.sensor_locations.size() == 6);
  CHECK(sp.sensing_for({0, 3}).n_z == 2);

  CHECK_THROWS_AS(make_trajectory_problem(c, bundle), ConfigError);
}

TEST_CASE("kernel-field bundles expose the trajectory problem") {
  const RunConfig c = parse_config(json::parse(
      R"({"scenario": {"name": "weather", "spin_steps": 200}})"));
  const ScenarioBundle bundle = build_scenario(c);
  CHECK(bundle.system.n_x() == 12);
  CHECK(bundle.tau == doctest::Approx(0.05).epsilon(1e-15));

  const TrajectoryProblem tp = make_trajectory_problem(c, bundle);
  CHECK(tp.speed == doctest::Approx(40.0).epsilon(1e-15));
  CHECK(tp.field == &bundle.weather->field());
  CHECK(tp.sigma_n(0, 0) == doctest::Approx(0.0025).epsilon(1e-14));
  CHECK(tp.tau == bundle.tau);

  CHECK_THROWS_AS(make_schedule_problem(c, bundle), ConfigError);

  SUBCASE("midpoint readout swaps the verification kind") {
    json j = json::parse(
        R"({"scenario": {"name": "weather", "spin_steps": 200, "readout": "midpoint"}})");
    const auto mid = build_scenario(parse_config(j));
    CHECK(mid.verification().kind() == VerificationSpec::Kind::Point);
    CHECK(mid.verification().t_start() == doctest::Approx(0.6).epsilon(1e-14));
  }
}

TEST_CASE("command-line overrides update the resolved config") {
  RunConfig c = parse_config(json::parse(R"({"seed": 1})"));
  apply_overrides(c, {.seed = 77, .step = 5e-3});
  CHECK(c.singer.seed == 77);
  CHECK(c.weather.seed == 77);
  CHECK(c.solver.step == 5e-3);

  apply_overrides(c, {});
  CHECK(c.singer.seed == 77);  // no-op when unset
  CHECK(c.solver.step == 5e-3);

  CHECK_THROWS_AS(apply_overrides(c, {.step = -1.0}), ConfigError);
}
