// Compares the OpenMP-parallel planner kernels against the serial reference
// (same code paths with the thread cap at 1) and checks the outputs match
// bitwise, which the deterministic reductions guarantee.

#include <chrono>
#include <cstdio>
#include <memory>
#include <vector>

#include "infoplan/parallel.hpp"
#include "infoplan/planners.hpp"

using namespace infoplan;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    body();
    const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start;
    if (elapsed.count() < best) best = elapsed.count();
  }
  return best;
}

void report(const char* kernel, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-14s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", kernel,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
  const int threads = hardware_threads();
  std::printf("hardware threads: %d\n", threads);

  // Field-map kernel over a dense lattice.
  {
    WeatherConfig config;
    const WeatherScenario scenario(config);
    const VerificationSpec spec = scenario.verification();
    const Matrix p0v = p0_given_window(scenario.system(), spec);
    const TimeGrid grid(0.0, scenario.tau(), 1e-3);
    const FlowBundle bundle = make_flow_bundle(scenario.system(), p0v, grid);
    const Matrix delta = bundle.delta_at_node(grid.step_count());
    const Matrix q = scenario.system().P0;
    const Matrix sigma_n = config.sigma_n * config.sigma_n * Matrix::Identity(1, 1);

    FieldLattice lattice;
    for (int i = 0; i <= 120; ++i) lattice.xs.push_back(3.0 * i / 120.0);
    for (int j = 0; j <= 80; ++j) lattice.ys.push_back(2.0 * j / 80.0);

    Matrix serial_out, parallel_out;
    set_max_threads(1);
    const double serial_ms = best_of(3, [&] {
      serial_out = field_map(q, delta, scenario.field(), sigma_n, lattice);
    });
    set_max_threads(threads);
    const double parallel_ms = best_of(3, [&] {
      parallel_out = field_map(q, delta, scenario.field(), sigma_n, lattice);
    });
    const bool identical = (serial_out - parallel_out).cwiseAbs().maxCoeff() == 0.0;
    report("field_map", serial_ms, parallel_ms, identical);
  }

  // Schedule candidate scoring (exhaustive subset sweep).
  {
    SingerConfig config;
    config.n_sensors = 10;
    config.active_size = 3;
    config.m_tau = 2;
    config.tau = 0.5;
    config.t_i = 1.0;
    config.t_f = 2.0;
    const auto scenario = std::make_shared<SingerScenario>(config);

    ScheduleProblem problem;
    problem.system = scenario->system();
    problem.spec = scenario->verification();
    problem.sensing_for = [scenario](const std::vector<int>& subset) {
      return scenario->sensing_for(subset);
    };
    problem.n_sensors = config.n_sensors;
    problem.subset_size = config.active_size;
    problem.n_intervals = config.m_tau;
    problem.tau = config.tau;
    problem.sensor_locations = scenario->sensors();

    SchedulePlan serial_plan, parallel_plan;
    set_max_threads(1);
    const double serial_ms = best_of(2, [&] { serial_plan = plan_schedule(problem); });
    set_max_threads(threads);
    const double parallel_ms = best_of(2, [&] { parallel_plan = plan_schedule(problem); });
    const bool identical = serial_plan.objective == parallel_plan.objective &&
                           serial_plan.intervals.size() == parallel_plan.intervals.size();
    report("plan_schedule", serial_ms, parallel_ms, identical);
  }

  // Trajectory multi-start pattern search.
  {
    WeatherConfig config;
    const auto scenario = std::make_shared<WeatherScenario>(config);
    TrajectoryProblem problem;
    problem.system = scenario->system();
    problem.spec = scenario->verification();
    problem.field = &scenario->field();
    problem.sigma_n = config.sigma_n * config.sigma_n * Matrix::Identity(1, 1);
    problem.start = config.platform_start;
    problem.speed = scenario->speed();
    problem.tau = scenario->tau();
    problem.segments = 4;
    problem.multistart = 8;
    problem.eval_budget_per_start = 40;

    TrajectoryPlan serial_plan, parallel_plan;
    set_max_threads(1);
    const double serial_ms = best_of(2, [&] { serial_plan = plan_trajectory(problem); });
    set_max_threads(threads);
    const double parallel_ms = best_of(2, [&] { parallel_plan = plan_trajectory(problem); });
    const bool identical = serial_plan.objective == parallel_plan.objective &&
                           serial_plan.best_start == parallel_plan.best_start;
    report("plan_trajectory", serial_ms, parallel_ms, identical);
  }

  return 0;
}
