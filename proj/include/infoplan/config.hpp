#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infoplan/planners.hpp"

namespace infoplan {

enum class ScenarioKind { Singer, Weather, Literal };

struct LiteralScenario {
  LinearGaussianSystem system;
  SensingModel sensing;
  std::optional<VerificationSpec> spec;
  double tau = 0.0;
};

struct PlanSettings {
  ScheduleSearch search = ScheduleSearch::Exhaustive;
  std::int64_t candidate_budget = 1000000;
  int segments = 6;
  int multistart = 36;
  int eval_budget_per_start = 200;
  std::optional<double> initial_heading;
  bool compare_strategies = false;
};

struct AxisSettings {
  double min = 0.0;
  double max = 1.0;
  int count = 2;
};

struct FieldSettings {
  std::vector<double> times{0.0};
  AxisSettings x{0.0, 3.0, 31};
  AxisSettings y{0.0, 2.0, 21};
};

struct OracleSettings {
  std::vector<double> dt_sweep{0.05, 0.025, 0.0125};  // each must divide the horizon
  int verification_samples = 50;
  double tolerance = 0.05;
  int max_rows = 4000;
};

/// Everything a CLI run needs, resolved from the JSON config file. Times are
/// model units except the weather scenario block, which takes hours and
/// converts on construction.
struct RunConfig {
  ScenarioKind scenario = ScenarioKind::Singer;
  SingerConfig singer{};
  SingerScenario::Verify singer_verify = SingerScenario::Verify::Velocity;
  WeatherConfig weather{};
  bool weather_midpoint_readout = false;
  std::optional<LiteralScenario> literal;
  SolverOptions solver{};
  PlanSettings plan{};
  FieldSettings field{};
  OracleSettings oracle{};
};

RunConfig parse_config(const nlohmann::json& root);
RunConfig load_config(const std::string& path);

/// Command-line overrides applied after parsing.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
};
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

/// Materialized scenario: the system, the verification readout, the baseline
/// sensing used by `quantify`, and the measurement horizon. The scenario
/// objects are kept alive because planner problems hold pointers into them.
struct ScenarioBundle {
  std::shared_ptr<SingerScenario> singer;
  std::shared_ptr<WeatherScenario> weather;
  LinearGaussianSystem system;
  SensingModel sensing;
  std::optional<VerificationSpec> spec;
  double tau = 0.0;

  const VerificationSpec& verification() const { return spec.value(); }
};

ScenarioBundle build_scenario(const RunConfig& config);

/// Schedule planning is defined for the sensor-network scenario.
ScheduleProblem make_schedule_problem(const RunConfig& config, const ScenarioBundle& bundle);

/// Trajectory planning and steering are defined for the kernel-field
/// scenario; the returned problem points at the bundle's field.
TrajectoryProblem make_trajectory_problem(const RunConfig& config,
                                          const ScenarioBundle& bundle);

}  // namespace infoplan
