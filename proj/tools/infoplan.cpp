#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "infoplan/artifacts.hpp"
#include "infoplan/config.hpp"
#include "infoplan/oracle.hpp"
#include "infoplan/parallel.hpp"

namespace fs = std::filesystem;
using namespace infoplan;

namespace {

std::string scenario_name(const RunConfig& config) {
  switch (config.scenario) {
    case ScenarioKind::Singer:
      return "singer";
    case ScenarioKind::Weather:
      return "weather";
    case ScenarioKind::Literal:
      return "literal";
  }
  return "literal";
}

InfoReport baseline_report(const ScenarioBundle& bundle, const SolverOptions& options) {
  const VerificationSpec& spec = bundle.verification();
  if (spec.kind() == VerificationSpec::Kind::Window) {
    return mi_windowed(bundle.system, bundle.sensing, spec, bundle.tau, options);
  }
  return mi_pointwise_smoother(bundle.system, bundle.sensing, spec, bundle.tau, options);
}

std::vector<double> linspace(const AxisSettings& axis) {
  std::vector<double> out(static_cast<std::size_t>(axis.count));
  if (axis.count == 1) {
    out[0] = axis.min;
    return out;
  }
  for (int i = 0; i < axis.count; ++i) {
    out[static_cast<std::size_t>(i)] =
        axis.min + (axis.max - axis.min) * static_cast<double>(i) /
                       static_cast<double>(axis.count - 1);
  }
  return out;
}

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

const char* search_name(ScheduleSearch search) {
  switch (search) {
    case ScheduleSearch::Exhaustive:
      return "exhaustive";
    case ScheduleSearch::Greedy:
      return "greedy";
    case ScheduleSearch::CrossExhaustive:
      return "cross-exhaustive";
  }
  return "exhaustive";
}

int cmd_quantify(const RunConfig& config, const ScenarioBundle& bundle, const fs::path& out) {
  const InfoReport report = baseline_report(bundle, config.solver);
  artifacts::write_json(out / "report.json",
                        artifacts::quantify_json(report, scenario_name(config), bundle.tau));
  artifacts::write_info_trace_csv(out / "info_trace.csv", report);
  std::cout << "total_mi " << artifacts::format_full(report.total_mi) << " nats\n";
  return 0;
}

int cmd_plan_schedule(const RunConfig& config, const ScenarioBundle& bundle,
                      const fs::path& out) {
  const ScheduleProblem problem = make_schedule_problem(config, bundle);
  const SchedulePlan plan = plan_schedule(problem, config.plan.search);
  artifacts::write_json(out / "plan.json",
                        artifacts::schedule_plan_json(plan, scenario_name(config),
                                                      search_name(config.plan.search),
                                                      problem.tau));
  artifacts::write_schedule_csv(out / "schedule.csv", plan);
  artifacts::write_info_trace_csv(out / "info_trace.csv", plan.report);
  std::cout << "objective " << artifacts::format_full(plan.objective) << " nats\n";
  return 0;
}

int cmd_plan_trajectory(const RunConfig& config, const ScenarioBundle& bundle,
                        const fs::path& out) {
  const TrajectoryProblem problem = make_trajectory_problem(config, bundle);
  if (!config.plan.compare_strategies) {
    const TrajectoryPlan plan = plan_trajectory(problem);
    artifacts::write_json(
        out / "plan.json",
        artifacts::trajectory_plan_json(plan, scenario_name(config), problem));
    artifacts::write_path_csv(out / "path.csv", plan.path, plan.report.times);
    artifacts::write_info_trace_csv(out / "info_trace.csv", plan.report);
    std::cout << "objective " << artifacts::format_full(plan.objective) << " nats\n";
    return 0;
  }

  // Four-way comparison: windowed-path readout vs midpoint readout, each
  // under the trajectory optimizer and under the steering-law rollout.
  TrajectoryProblem window_problem = problem;
  window_problem.spec = bundle.weather->verification();
  TrajectoryProblem point_problem = problem;
  point_problem.spec = bundle.weather->midpoint_verification();

  const auto emit_opt = [&](const TrajectoryProblem& p, const std::string& tag) {
    const TrajectoryPlan plan = plan_trajectory(p);
    artifacts::json doc = artifacts::trajectory_plan_json(plan, scenario_name(config), p);
    doc["strategy"] = tag;
    artifacts::write_json(out / ("plan_" + tag + ".json"), doc);
    artifacts::write_path_csv(out / ("path_" + tag + ".csv"), plan.path, plan.report.times);
    std::cout << tag << ' ' << artifacts::format_full(plan.objective) << " nats\n";
  };
  const auto emit_steer = [&](const TrajectoryProblem& p, const std::string& tag) {
    const RolloutResult rollout = steer_rollout(p, config.plan.initial_heading);
    artifacts::json doc = artifacts::steer_json(rollout, scenario_name(config), p);
    doc["strategy"] = tag;
    artifacts::write_json(out / ("plan_" + tag + ".json"), doc);
    artifacts::write_path_csv(out / ("path_" + tag + ".csv"), rollout);
    std::cout << tag << ' ' << artifacts::format_full(rollout.objective) << " nats\n";
  };

  emit_opt(window_problem, "window_opt");
  emit_steer(window_problem, "window_steer");
  emit_opt(point_problem, "point_opt");
  emit_steer(point_problem, "point_steer");
  return 0;
}

int cmd_plan_steer(const RunConfig& config, const ScenarioBundle& bundle,
                   const fs::path& out) {
  const TrajectoryProblem problem = make_trajectory_problem(config, bundle);
  const RolloutResult rollout = steer_rollout(problem, config.plan.initial_heading);
  artifacts::write_json(out / "plan.json",
                        artifacts::steer_json(rollout, scenario_name(config), problem));
  artifacts::write_path_csv(out / "path.csv", rollout);
  artifacts::write_info_trace_csv(out / "info_trace.csv", rollout.report);
  std::cout << "objective " << artifacts::format_full(rollout.objective) << " nats\n";
  return 0;
}

int cmd_field(const RunConfig& config, const ScenarioBundle& bundle, const fs::path& out) {
  if (!bundle.weather) {
    throw ConfigError("the field command needs the kernel-field scenario");
  }
  for (const double t : config.field.times) {
    if (t > bundle.tau + 1e-9) {
      throw ConfigError("config.field.times: times must not pass the measurement horizon");
    }
  }
  const VerificationSpec& spec = bundle.verification();
  const Matrix p0v = spec.kind() == VerificationSpec::Kind::Window
                         ? p0_given_window(bundle.system, spec, config.solver)
                         : p0_given_point(bundle.system, spec, config.solver);
  const TimeGrid grid(0.0, bundle.tau, config.solver.step);
  const FlowBundle flows = make_flow_bundle(bundle.system, p0v, grid);
  const MatrixTrajectory q =
      riccati_filter_forward(bundle.system, bundle.sensing, bundle.system.P0, grid);
  const FieldLattice lattice{linspace(config.field.x), linspace(config.field.y)};
  for (const double t : config.field.times) {
    const Matrix rates = field_map(q.at_time(t), flows.delta_at_time(t),
                                   bundle.weather->field(), bundle.sensing.sigma_n, lattice);
    const fs::path file = out / ("field_t" + time_tag(t) + ".csv");
    artifacts::write_field_csv(file, lattice, rates);
    std::cout << "wrote " << file.generic_string() << '\n';
  }
  return 0;
}

int cmd_oracle_check(const RunConfig& config, const ScenarioBundle& bundle,
                     const fs::path& out) {
  const VerificationSpec& spec = bundle.verification();
  const OracleSettings& settings = config.oracle;

  const Eigen::Index verify_rows =
      spec.kind() == VerificationSpec::Kind::Window
          ? spec.n_v() * static_cast<Eigen::Index>(settings.verification_samples)
          : spec.n_v();
  for (const double dt : settings.dt_sweep) {
    const auto n_meas = static_cast<Eigen::Index>(std::llround(bundle.tau / dt));
    const Eigen::Index rows = verify_rows + bundle.sensing.n_z * n_meas;
    if (rows > settings.max_rows) {
      const double needed_dt =
          bundle.tau * static_cast<double>(bundle.sensing.n_z) /
          std::max(1.0, static_cast<double>(settings.max_rows - verify_rows));
      std::cerr << "config error: joint covariance at dt=" << time_tag(dt) << " needs "
                << rows << " rows, above the cap " << settings.max_rows
                << "; raise dt to at least " << time_tag(needed_dt)
                << " or lower verification_samples\n";
      return 2;
    }
  }

  const InfoReport report = baseline_report(bundle, config.solver);
  const double continuous = report.total_mi;
  const double scale = std::max(std::abs(continuous), 1e-12);

  artifacts::json sweep = artifacts::json::array();
  double best_dt = settings.dt_sweep.front();
  double best_rel = 0.0;
  bool first = true;
  for (const double dt : settings.dt_sweep) {
    oracle::BruteMiOptions options;
    options.dt = dt;
    options.m_samples = settings.verification_samples;
    options.exp_substep = std::min(dt, 1e-3);
    const double brute =
        oracle::brute_mi(bundle.system, bundle.sensing, spec, bundle.tau, options);
    const double rel = std::abs(brute - continuous) / scale;
    artifacts::json row;
    row["dt"] = artifacts::quantity(dt, "model_time");
    row["brute_mi"] = artifacts::quantity(brute, "nats");
    row["rel_error"] = artifacts::quantity(rel, "dimensionless");
    sweep.push_back(row);
    if (first || dt < best_dt) {
      best_dt = dt;
      best_rel = rel;
      first = false;
    }
  }

  artifacts::json doc;
  doc["command"] = "oracle-check";
  doc["scenario"] = scenario_name(config);
  doc["horizon"] = artifacts::quantity(bundle.tau, "model_time");
  doc["continuous_mi"] = artifacts::quantity(continuous, "nats");
  doc["sweep"] = sweep;
  doc["tolerance"] = artifacts::quantity(settings.tolerance, "dimensionless");
  doc["pass"] = best_rel <= settings.tolerance;
  artifacts::write_json(out / "oracle.json", doc);
  std::cout << "rel_error " << artifacts::format_full(best_rel) << " at dt "
            << time_tag(best_dt) << (best_rel <= settings.tolerance ? " pass" : " fail")
            << '\n';
  return 0;
}

int resolve_threads(const CLI::Option* flag, int flag_value) {
  if (flag->count() > 0) {
    if (flag_value < 1) throw ConfigError("--threads must be a positive integer");
    return flag_value;
  }
  if (const char* env = std::getenv("INFOPLAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError("INFOPLAN_THREADS must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return hardware_threads();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"information planning for continuous linear-Gaussian verification"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (defaults when omitted)");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = app.add_option("--seed", seed_value, "override the scenario seed");
  double step_value = 0.0;
  CLI::Option* step_opt = app.add_option("--step", step_value, "override the solver step");
  int threads_value = 0;
  CLI::Option* threads_opt =
      app.add_option("--threads", threads_value, "worker thread cap (env INFOPLAN_THREADS)");
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "output directory for artifacts");

  CLI::App* quantify = app.add_subcommand(
      "quantify", "mutual information of the baseline sensing configuration");
  quantify->fallthrough();
  CLI::App* plan = app.add_subcommand("plan", "optimize the sensing decision");
  plan->fallthrough();
  plan->require_subcommand(1);
  CLI::App* plan_schedule_cmd =
      plan->add_subcommand("schedule", "choose sensor subsets per decision interval");
  plan_schedule_cmd->fallthrough();
  CLI::App* plan_trajectory_cmd =
      plan->add_subcommand("trajectory", "optimize the sensing platform path");
  plan_trajectory_cmd->fallthrough();
  CLI::App* plan_steer_cmd =
      plan->add_subcommand("steer", "roll out the gradient steering law");
  plan_steer_cmd->fallthrough();
  CLI::App* field_cmd =
      app.add_subcommand("field", "information-rate lattice over the sensing domain");
  field_cmd->fallthrough();
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "compare the continuous value against discrete brute force");
  oracle_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    set_max_threads(resolve_threads(threads_opt, threads_value));

    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    ConfigOverrides overrides;
    if (seed_opt->count() > 0) overrides.seed = seed_value;
    if (step_opt->count() > 0) overrides.step = step_value;
    apply_overrides(config, overrides);

    const ScenarioBundle bundle = build_scenario(config);
    const fs::path out(out_dir);

    if (quantify->parsed()) return cmd_quantify(config, bundle, out);
    if (plan->parsed()) {
      if (plan_schedule_cmd->parsed()) return cmd_plan_schedule(config, bundle, out);
      if (plan_trajectory_cmd->parsed()) return cmd_plan_trajectory(config, bundle, out);
      if (plan_steer_cmd->parsed()) return cmd_plan_steer(config, bundle, out);
    }
    if (field_cmd->parsed()) return cmd_field(config, bundle, out);
    if (oracle_cmd->parsed()) return cmd_oracle_check(config, bundle, out);
    std::cerr << "error: no command selected\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetExceededError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return 2;
  } catch (const AssumptionViolationError& e) {
    std::cerr << "assumption error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
