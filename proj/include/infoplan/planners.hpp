#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "infoplan/mi.hpp"
#include "infoplan/scenarios.hpp"

namespace infoplan {

// ---------------------------------------------------------------------------
// Constant-speed planar path with piecewise-linear heading between knots.
// Positions are exact arc integrals of (v cos theta, v sin theta), so the
// path is smooth in the knot angles and cheap to query at arbitrary times.
class HeadingPath {
 public:
  /// Default path: stationary at the origin.
  HeadingPath() : HeadingPath(Vector::Zero(1), Vector::Zero(1), {0.0, 0.0}, 0.0) {}
  HeadingPath(Vector knot_times, Vector knot_angles, Eigen::Vector2d start, double speed);

  Eigen::Vector2d position(double t) const;  // clamped to the knot span
  double heading(double t) const;

  const Vector& knot_times() const { return times_; }
  const Vector& knot_angles() const { return angles_; }
  const Eigen::Vector2d& start() const { return start_; }
  double speed() const { return speed_; }

 private:
  Vector times_;
  Vector angles_;
  Eigen::Vector2d start_;
  double speed_;
  std::vector<Eigen::Vector2d> knot_positions_;
};

// ---------------------------------------------------------------------------
// Sensor-subset scheduling: split [0, tau] into equal decision intervals and
// keep a fixed subset of sensors on within each interval.

struct ScheduleProblem {
  LinearGaussianSystem system;
  VerificationSpec spec;
  /// Builds the stacked sensing model for an ascending subset of sensor indices.
  std::function<SensingModel(const std::vector<int>&)> sensing_for;
  int n_sensors = 0;
  int subset_size = 0;  // sensors kept on per interval
  int n_intervals = 1;
  double tau = 0.0;
  SolverOptions options{};
  /// Cap on candidate evaluations per interval (and on full assignments in
  /// cross-exhaustive search) before the search refuses to run.
  std::int64_t candidate_budget = 1000000;
  std::vector<Eigen::Vector2d> sensor_locations;  // optional, for artifacts
};

enum class ScheduleSearch {
  Exhaustive,       // all subsets within each interval, intervals sequential
  Greedy,           // grow each interval's subset one sensor at a time
  CrossExhaustive,  // all subset assignments across all intervals jointly
};

struct ScheduleChoice {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<int> sensors;
};

struct SchedulePlan {
  std::vector<ScheduleChoice> intervals;
  double objective = 0.0;  // nats accumulated at tau
  InfoReport report;       // full trace under the chosen schedule
  std::int64_t evaluations = 0;
};

/// Evaluate a fixed schedule (one subset per interval) by stitching the
/// filtering flow across intervals; reference evaluation for plans.
InfoReport evaluate_schedule(const ScheduleProblem& problem,
                             const std::vector<std::vector<int>>& subsets);

/// Search for the best schedule. Exhaustive and greedy modes decide each
/// interval in order, scoring candidates by the information accumulated up to
/// the interval end with the filtering covariance carried forward; ties break
/// to the first candidate in ascending lexicographic order. The objective of
/// the returned plan re-evaluates identically through evaluate_schedule.
SchedulePlan plan_schedule(const ScheduleProblem& problem,
                           ScheduleSearch search = ScheduleSearch::Exhaustive);

// ---------------------------------------------------------------------------
// Sensing-trajectory planning over a kernel interpolation field.

struct TrajectoryProblem {
  LinearGaussianSystem system;
  VerificationSpec spec;             // window or point readout
  const KernelField* field = nullptr;
  Matrix sigma_n;                    // scalar channel noise (1 x 1)
  Eigen::Vector2d start{0.0, 0.0};
  double speed = 0.0;
  double tau = 0.0;
  int segments = 6;                  // heading knots = segments + 1
  int multistart = 36;               // straight-line initial guesses (a steering-law start is always added)
  int eval_budget_per_start = 200;
  std::optional<std::pair<double, double>> heading_bounds;
  SolverOptions options{};
};

/// Heading of steepest ascent of the information rate with respect to the
/// sensing position; empty when the spatial gradient vanishes (caller holds
/// the previous heading).
std::optional<double> gradient_steer(const Matrix& Q, const Matrix& delta,
                                     const KernelField& field, const Matrix& sigma_n,
                                     const Eigen::Vector2d& position);

struct RolloutResult {
  std::vector<double> times;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> headings;
  double objective = 0.0;  // nats at tau
  InfoReport report;
};

/// Follow the steering law: at every grid node re-aim along gradient_steer
/// and fly straight for one step while the filtering covariance advances.
RolloutResult steer_rollout(const TrajectoryProblem& problem,
                            std::optional<double> initial_heading = {});

struct TrajectoryPlan {
  HeadingPath path;
  double objective = 0.0;  // nats at tau
  InfoReport report;
  std::int64_t evaluations = 0;
  int best_start = 0;  // winning start index; == multistart means the steering-law start
};

/// Multi-start coordinate pattern search over the heading knots (shrink
/// factor 0.5, fixed evaluation budget per start); starts run concurrently
/// and reduce deterministically (best objective, ties to the lowest start).
TrajectoryPlan plan_trajectory(const TrajectoryProblem& problem);

// ---------------------------------------------------------------------------
// Information potential field: the instantaneous rate a hypothetical sensor
// at each lattice point would achieve given the current covariance state.

struct FieldLattice {
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Rates as a ys.size() by xs.size() matrix (row = y index). The rate kernel
/// is computed once and shared across lattice points.
Matrix field_map(const Matrix& Q, const Matrix& delta, const KernelField& field,
                 const Matrix& sigma_n, const FieldLattice& lattice);

}  // namespace infoplan
