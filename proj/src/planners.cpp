#include "infoplan/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "infoplan/parallel.hpp"

namespace infoplan {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// HeadingPath

HeadingPath::HeadingPath(Vector knot_times, Vector knot_angles, Eigen::Vector2d start,
                         double speed)
    : times_(std::move(knot_times)),
      angles_(std::move(knot_angles)),
      start_(start),
      speed_(speed) {
  if (times_.size() < 1 || times_.size() != angles_.size()) {
    throw ConfigError("heading path needs matching, nonempty knot times and angles");
  }
  for (Eigen::Index k = 0; k + 1 < times_.size(); ++k) {
    if (!(times_(k + 1) > times_(k))) {
      throw ConfigError("heading path knot times must be strictly increasing");
    }
  }
  if (speed_ < 0.0) throw ConfigError("path speed must be nonnegative");
  knot_positions_.resize(static_cast<std::size_t>(times_.size()));
  knot_positions_[0] = start_;
  for (Eigen::Index k = 0; k + 1 < times_.size(); ++k) {
    const double dt = times_(k + 1) - times_(k);
    const double slope = (angles_(k + 1) - angles_(k)) / dt;
    const double u = 0.5 * slope * dt;
    const double mid = angles_(k) + u;
    const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
    const Eigen::Vector2d d(std::cos(mid) * sinc, std::sin(mid) * sinc);
    knot_positions_[static_cast<std::size_t>(k + 1)] =
        knot_positions_[static_cast<std::size_t>(k)] + speed_ * dt * d;
  }
}

namespace {

Eigen::Index segment_of(const Vector& times, double t) {
  Eigen::Index k = 0;
  while (k + 2 < times.size() && t >= times(k + 1)) ++k;
  return k;
}

}  // namespace

Eigen::Vector2d HeadingPath::position(double t) const {
  if (times_.size() == 1 || t <= times_(0)) return knot_positions_.front();
  if (t >= times_(times_.size() - 1)) return knot_positions_.back();
  const Eigen::Index k = segment_of(times_, t);
  const double dt = times_(k + 1) - times_(k);
  const double slope = (angles_(k + 1) - angles_(k)) / dt;
  const double delta = t - times_(k);
  // Exact arc displacement: the half-angle product form stays accurate as the
  // turn rate approaches zero.
  const double u = 0.5 * slope * delta;
  const double mid = angles_(k) + u;
  const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
  const Eigen::Vector2d d(std::cos(mid) * sinc, std::sin(mid) * sinc);
  return knot_positions_[static_cast<std::size_t>(k)] + speed_ * delta * d;
}

double HeadingPath::heading(double t) const {
  if (times_.size() == 1 || t <= times_(0)) return angles_(0);
  if (t >= times_(times_.size() - 1)) return angles_(angles_.size() - 1);
  const Eigen::Index k = segment_of(times_, t);
  const double w = (t - times_(k)) / (times_(k + 1) - times_(k));
  return (1.0 - w) * angles_(k) + w * angles_(k + 1);
}

// ---------------------------------------------------------------------------
// Shared preparation

namespace {

Matrix conditional_prior(const LinearGaussianSystem& system, const VerificationSpec& spec,
                         const SolverOptions& options) {
  return spec.kind() == VerificationSpec::Kind::Window ? p0_given_window(system, spec, options)
                                                       : p0_given_point(system, spec, options);
}

void check_horizon(const VerificationSpec& spec, double tau) {
  if (!(tau > 0.0)) throw ConfigError("measurement horizon must be positive");
  if (tau > spec.t_start() + 1e-12) {
    throw ConfigError(spec.kind() == VerificationSpec::Kind::Window
                          ? "measurement horizon must end at or before the verification "
                            "window starts"
                          : "measurement horizon must end at or before the readout time");
  }
}

std::int64_t combination_count(int n, int k, std::int64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    if (c > cap || c > std::numeric_limits<std::int64_t>::max() / std::max(n, 1)) {
      return cap + 1;
    }
    c = c * (n - k + i) / i;  // exact: product of i consecutive ints divisible by i!
  }
  return std::min(c, cap + 1);
}

/// Advance to the next k-combination of {0..n-1} in lexicographic order.
bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) {
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      }
      return true;
    }
  }
  return false;
}

struct SchedulePrep {
  TimeGrid grid;
  FlowBundle bundle;
  std::vector<std::size_t> edge_nodes;  // n_intervals + 1 node indices into grid
};

SchedulePrep prepare_schedule(const ScheduleProblem& p) {
  if (p.n_sensors < 1) throw ConfigError("schedule needs at least one sensor");
  if (p.subset_size < 1 || p.subset_size > p.n_sensors) {
    throw ConfigError("subset size must lie in [1, n_sensors]");
  }
  if (p.n_intervals < 1) throw ConfigError("at least one decision interval is required");
  if (!p.sensing_for) throw ConfigError("schedule problem is missing the sensing builder");
  check_horizon(p.spec, p.tau);

  TimeGrid grid(0.0, p.tau, p.options.step);
  std::vector<std::size_t> edges(static_cast<std::size_t>(p.n_intervals) + 1);
  const double len = p.tau / static_cast<double>(p.n_intervals);
  for (int i = 0; i <= p.n_intervals; ++i) {
    const double t = i == p.n_intervals ? p.tau : static_cast<double>(i) * len;
    edges[static_cast<std::size_t>(i)] = grid.node_index(t);
  }
  for (int i = 0; i < p.n_intervals; ++i) {
    if (edges[static_cast<std::size_t>(i + 1)] <= edges[static_cast<std::size_t>(i)]) {
      throw ConfigError("decision intervals must each cover at least one step");
    }
  }

  const Matrix p0v = conditional_prior(p.system, p.spec, p.options);
  FlowBundle bundle = make_flow_bundle(p.system, p0v, grid);
  return {std::move(grid), std::move(bundle), std::move(edges)};
}

void check_subset(const std::vector<int>& subset, int n_sensors) {
  if (subset.empty()) throw ConfigError("sensor subset must be nonempty");
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 0 || subset[i] >= n_sensors) {
      throw ConfigError("sensor index out of range");
    }
    if (i > 0 && subset[i] <= subset[i - 1]) {
      throw ConfigError("sensor subset must be strictly ascending");
    }
  }
}

/// Filtering covariance at the end of one interval, continuing from Q at the
/// interval start, under a fixed subset.
Matrix propagate_interval(const ScheduleProblem& p, const SchedulePrep& prep, int interval,
                          const std::vector<int>& subset, const Matrix& Q) {
  const std::size_t a = prep.edge_nodes[static_cast<std::size_t>(interval)];
  const std::size_t b = prep.edge_nodes[static_cast<std::size_t>(interval) + 1];
  const SensingModel sensing = p.sensing_for(subset);
  return riccati_filter_propagate(p.system, sensing, Q, prep.grid.node(a),
                                  prep.grid.step(), b - a);
}

InfoReport assemble_schedule_report(const ScheduleProblem& p, const SchedulePrep& prep,
                                    const std::vector<std::vector<int>>& subsets) {
  const TimeGrid& grid = prep.grid;
  InfoReport report;
  report.j0_end = prep.bundle.j0.back();
  report.times.resize(grid.node_count());
  report.onthefly.resize(grid.node_count());
  report.rate.resize(grid.node_count());
  for (std::size_t k = 0; k < grid.node_count(); ++k) report.times[k] = grid.node(k);

  Matrix Q = symmetrized(p.system.P0);
  for (int i = 0; i < p.n_intervals; ++i) {
    const std::size_t a = prep.edge_nodes[static_cast<std::size_t>(i)];
    const std::size_t b = prep.edge_nodes[static_cast<std::size_t>(i) + 1];
    const SensingModel sensing = p.sensing_for(subsets[static_cast<std::size_t>(i)]);
    const TimeGrid local(grid.node(a), grid.node(b), grid.step());
    const MatrixTrajectory traj = riccati_filter_forward(p.system, sensing, Q, local);
    const std::size_t first_local = i == 0 ? 0 : 1;
    for (std::size_t k = first_local; k < traj.size(); ++k) {
      const std::size_t g = a + k;
      report.onthefly[g] = mi_at_node(prep.bundle, g, traj.at_node(k));
      report.rate[g] = info_rate(traj.at_node(k), prep.bundle.delta_at_node(g),
                                 sensing.C(grid.node(g)), sensing.sigma_n);
    }
    Q = traj.at_node(traj.size() - 1);
  }
  report.total_mi = report.onthefly.back();
  report.interval_gains.resize(static_cast<std::size_t>(p.n_intervals));
  for (int i = 0; i < p.n_intervals; ++i) {
    report.interval_gains[static_cast<std::size_t>(i)] =
        report.onthefly[prep.edge_nodes[static_cast<std::size_t>(i) + 1]] -
        report.onthefly[prep.edge_nodes[static_cast<std::size_t>(i)]];
  }
  return report;
}

std::vector<std::vector<int>> all_subsets(const ScheduleProblem& p) {
  std::vector<std::vector<int>> subsets;
  std::vector<int> c(static_cast<std::size_t>(p.subset_size));
  for (int i = 0; i < p.subset_size; ++i) c[static_cast<std::size_t>(i)] = i;
  do {
    subsets.push_back(c);
  } while (next_combination(c, p.n_sensors));
  return subsets;
}

std::size_t argmax_first(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace

InfoReport evaluate_schedule(const ScheduleProblem& problem,
                             const std::vector<std::vector<int>>& subsets) {
  const SchedulePrep prep = prepare_schedule(problem);
  if (static_cast<int>(subsets.size()) != problem.n_intervals) {
    throw ConfigError("schedule must assign one sensor subset per interval");
  }
  for (const auto& s : subsets) check_subset(s, problem.n_sensors);
  return assemble_schedule_report(problem, prep, subsets);
}

SchedulePlan plan_schedule(const ScheduleProblem& problem, ScheduleSearch search) {
  const SchedulePrep prep = prepare_schedule(problem);
  const std::int64_t n_candidates =
      combination_count(problem.n_sensors, problem.subset_size, problem.candidate_budget);

  std::vector<std::vector<int>> chosen;
  std::int64_t evaluations = 0;
  double searched_objective = 0.0;

  if (search == ScheduleSearch::Exhaustive || search == ScheduleSearch::Greedy) {
    if (search == ScheduleSearch::Exhaustive && n_candidates > problem.candidate_budget) {
      std::ostringstream os;
      os << "exhaustive search needs " << n_candidates << " candidate subsets per interval, "
         << "above the budget " << problem.candidate_budget
         << "; use the greedy search mode or raise candidate_budget";
      throw BudgetExceededError(os.str());
    }
    const std::vector<std::vector<int>> subsets =
        search == ScheduleSearch::Exhaustive ? all_subsets(problem)
                                             : std::vector<std::vector<int>>{};
    Matrix Q = symmetrized(problem.system.P0);
    for (int i = 0; i < problem.n_intervals; ++i) {
      const std::size_t end_node = prep.edge_nodes[static_cast<std::size_t>(i) + 1];
      std::vector<int> pick;
      if (search == ScheduleSearch::Exhaustive) {
        std::vector<double> scores(subsets.size());
        parallel_for(subsets.size(), [&](std::size_t ci) {
          const Matrix Qe = propagate_interval(problem, prep, i, subsets[ci], Q);
          scores[ci] = mi_at_node(prep.bundle, end_node, Qe);
        });
        evaluations += static_cast<std::int64_t>(subsets.size());
        const std::size_t best = argmax_first(scores);
        pick = subsets[best];
        searched_objective = scores[best];
      } else {
        for (int slot = 0; slot < problem.subset_size; ++slot) {
          std::vector<int> pool;
          for (int s = 0; s < problem.n_sensors; ++s) {
            if (std::find(pick.begin(), pick.end(), s) == pick.end()) pool.push_back(s);
          }
          std::vector<double> scores(pool.size());
          std::vector<std::vector<int>> grown(pool.size());
          for (std::size_t gi = 0; gi < pool.size(); ++gi) {
            grown[gi] = pick;
            grown[gi].push_back(pool[gi]);
            std::sort(grown[gi].begin(), grown[gi].end());
          }
          parallel_for(pool.size(), [&](std::size_t gi) {
            const Matrix Qe = propagate_interval(problem, prep, i, grown[gi], Q);
            scores[gi] = mi_at_node(prep.bundle, end_node, Qe);
          });
          evaluations += static_cast<std::int64_t>(pool.size());
          const std::size_t best = argmax_first(scores);
          pick = grown[best];
          searched_objective = scores[best];
        }
      }
      Q = propagate_interval(problem, prep, i, pick, Q);
      chosen.push_back(std::move(pick));
    }
  } else {
    // Joint search over all assignments; prefixes share their propagation.
    std::int64_t total = n_candidates;
    for (int i = 1; i < problem.n_intervals; ++i) {
      if (total > problem.candidate_budget ||
          total > std::numeric_limits<std::int64_t>::max() / std::max<std::int64_t>(
                                                                 n_candidates, 1)) {
        total = problem.candidate_budget + 1;
        break;
      }
      total *= n_candidates;
    }
    if (total > problem.candidate_budget) {
      std::ostringstream os;
      os << "cross-exhaustive search needs more than " << problem.candidate_budget
         << " full assignments; use the sequential modes or raise candidate_budget";
      throw BudgetExceededError(os.str());
    }
    const std::vector<std::vector<int>> subsets = all_subsets(problem);
    const std::size_t final_node = prep.edge_nodes.back();
    double best_score = 0.0;
    bool have_best = false;
    std::vector<std::size_t> assignment(static_cast<std::size_t>(problem.n_intervals));
    std::vector<std::size_t> best_assignment;
    // Depth-first over intervals, carrying Q down the prefix.
    const std::function<void(int, const Matrix&)> descend = [&](int interval,
                                                                const Matrix& Q) {
      for (std::size_t ci = 0; ci < subsets.size(); ++ci) {
        assignment[static_cast<std::size_t>(interval)] = ci;
        const Matrix Qe = propagate_interval(problem, prep, interval, subsets[ci], Q);
        if (interval + 1 == problem.n_intervals) {
          ++evaluations;
          const double score = mi_at_node(prep.bundle, final_node, Qe);
          if (!have_best || score > best_score) {
            have_best = true;
            best_score = score;
            best_assignment = assignment;
          }
        } else {
          descend(interval + 1, Qe);
        }
      }
    };
    descend(0, symmetrized(problem.system.P0));
    for (std::size_t i = 0; i < best_assignment.size(); ++i) {
      chosen.push_back(subsets[best_assignment[i]]);
    }
    searched_objective = best_score;
  }

  SchedulePlan plan;
  plan.report = assemble_schedule_report(problem, prep, chosen);
  plan.objective = plan.report.total_mi;
  plan.evaluations = evaluations;
  const double len = problem.tau / static_cast<double>(problem.n_intervals);
  for (int i = 0; i < problem.n_intervals; ++i) {
    plan.intervals.push_back({static_cast<double>(i) * len,
                              i + 1 == problem.n_intervals ? problem.tau
                                                           : static_cast<double>(i + 1) * len,
                              chosen[static_cast<std::size_t>(i)]});
  }
  if (std::abs(plan.objective - searched_objective) >
      1e-10 * std::max(1.0, std::abs(searched_objective))) {
    throw NumericalConsistencyError(
        "schedule objective did not reproduce under re-evaluation");
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Trajectory planning

namespace {

void check_trajectory_problem(const TrajectoryProblem& p) {
  if (p.field == nullptr) throw ConfigError("trajectory problem needs a sensing field");
  if (p.speed < 0.0) throw ConfigError("platform speed must be nonnegative");
  if (p.segments < 1) throw ConfigError("at least one heading segment is required");
  if (p.multistart < 1) throw ConfigError("at least one start is required");
  if (p.eval_budget_per_start < 1) throw ConfigError("evaluation budget must be positive");
  if (p.sigma_n.rows() != 1 || p.sigma_n.cols() != 1 || !(p.sigma_n(0, 0) > 0.0)) {
    throw ConfigError("kernel sensing uses a positive 1x1 noise intensity");
  }
  if (p.heading_bounds && !(p.heading_bounds->second > p.heading_bounds->first)) {
    throw ConfigError("heading bounds must be a nonempty interval");
  }
  check_horizon(p.spec, p.tau);
}

SensingModel path_sensing(const TrajectoryProblem& p, HeadingPath path) {
  SensingModel m;
  m.n_z = 1;
  m.sigma_n = p.sigma_n;
  const KernelField* field = p.field;
  m.C = [field, path = std::move(path)](double t) { return field->row(path.position(t)); };
  return m;
}

struct TrajectoryPrep {
  TimeGrid grid;
  FlowBundle bundle;
  Vector knot_times;
};

TrajectoryPrep prepare_trajectory(const TrajectoryProblem& p) {
  check_trajectory_problem(p);
  TimeGrid grid(0.0, p.tau, p.options.step);
  const Matrix p0v = conditional_prior(p.system, p.spec, p.options);
  FlowBundle bundle = make_flow_bundle(p.system, p0v, grid);
  Vector knot_times(p.segments + 1);
  for (int j = 0; j <= p.segments; ++j) {
    knot_times(j) = j == p.segments
                        ? p.tau
                        : p.tau * static_cast<double>(j) / static_cast<double>(p.segments);
  }
  return {std::move(grid), std::move(bundle), std::move(knot_times)};
}

double evaluate_profile(const TrajectoryProblem& p, const TrajectoryPrep& prep,
                        const Vector& angles) {
  HeadingPath path(prep.knot_times, angles, p.start, p.speed);
  const SensingModel sensing = path_sensing(p, std::move(path));
  const Matrix Q =
      riccati_filter_propagate(p.system, sensing, symmetrized(p.system.P0),
                               prep.grid.t_start(), prep.grid.step(), prep.grid.step_count());
  return mi_at_node(prep.bundle, prep.grid.step_count(), Q);
}

double clamp_angle(const TrajectoryProblem& p, double a) {
  if (!p.heading_bounds) return a;
  return std::clamp(a, p.heading_bounds->first, p.heading_bounds->second);
}

struct StartOutcome {
  double objective = 0.0;
  Vector angles;
  std::int64_t evaluations = 0;
};

StartOutcome pattern_search(const TrajectoryProblem& p, const TrajectoryPrep& prep,
                            Vector center) {
  const Eigen::Index n = prep.knot_times.size();
  StartOutcome out;
  out.objective = evaluate_profile(p, prep, center);
  out.evaluations = 1;
  double step = 0.5 * kPi;
  const std::int64_t budget = p.eval_budget_per_start;
  while (out.evaluations < budget && step > 1e-4) {
    bool improved = false;
    for (Eigen::Index j = 0; j < n && out.evaluations < budget; ++j) {
      for (const double sign : {1.0, -1.0}) {
        if (out.evaluations >= budget) break;
        Vector cand = center;
        cand(j) = clamp_angle(p, cand(j) + sign * step);
        if (cand(j) == center(j)) continue;
        const double value = evaluate_profile(p, prep, cand);
        ++out.evaluations;
        if (value > out.objective) {
          out.objective = value;
          center = std::move(cand);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  out.angles = std::move(center);
  return out;
}

InfoReport trace_along_path(const TrajectoryProblem& p, const TrajectoryPrep& prep,
                            const SensingModel& sensing) {
  const MatrixTrajectory Q =
      riccati_filter_forward(p.system, sensing, symmetrized(p.system.P0), prep.grid);
  InfoReport report;
  report.j0_end = prep.bundle.j0.back();
  report.times.resize(prep.grid.node_count());
  report.onthefly.resize(prep.grid.node_count());
  report.rate.resize(prep.grid.node_count());
  for (std::size_t k = 0; k < prep.grid.node_count(); ++k) {
    const double t = prep.grid.node(k);
    report.times[k] = t;
    report.onthefly[k] = mi_at_node(prep.bundle, k, Q.at_node(k));
    report.rate[k] =
        info_rate(Q.at_node(k), prep.bundle.delta_at_node(k), sensing.C(t), sensing.sigma_n);
  }
  report.total_mi = report.onthefly.back();
  return report;
}

}  // namespace

std::optional<double> gradient_steer(const Matrix& Q, const Matrix& delta,
                                     const KernelField& field, const Matrix& sigma_n,
                                     const Eigen::Vector2d& position) {
  if (sigma_n.rows() != 1 || sigma_n.cols() != 1) {
    throw ConfigError("gradient steering assumes a scalar sensing channel");
  }
  const Matrix kernel = info_gain_kernel(Q, delta);
  const Matrix C = field.row(position);
  const auto [dx, dy] = field.row_gradient(position);
  const Matrix weighted = (C / sigma_n(0, 0)) * kernel;  // 1 x n
  const double gx = (weighted * dx)(0);
  const double gy = (weighted * dy)(0);
  if (std::hypot(gx, gy) < 1e-30) return std::nullopt;
  return std::atan2(gy, gx);
}

RolloutResult steer_rollout(const TrajectoryProblem& problem,
                            std::optional<double> initial_heading) {
  const TrajectoryPrep prep = prepare_trajectory(problem);
  const TimeGrid& grid = prep.grid;
  const KernelField& field = *problem.field;

  RolloutResult out;
  const std::size_t n_nodes = grid.node_count();
  out.times.resize(n_nodes);
  out.xs.resize(n_nodes);
  out.ys.resize(n_nodes);
  out.headings.resize(n_nodes);
  out.report.j0_end = prep.bundle.j0.back();
  out.report.times.resize(n_nodes);
  out.report.onthefly.resize(n_nodes);
  out.report.rate.resize(n_nodes);

  Matrix Q = symmetrized(problem.system.P0);
  Eigen::Vector2d r = problem.start;
  double theta = initial_heading.value_or(0.0);

  for (std::size_t k = 0; k < n_nodes; ++k) {
    const Matrix delta = prep.bundle.delta_at_node(k);
    if (const auto steer = gradient_steer(Q, delta, field, problem.sigma_n, r)) {
      theta = *steer;
    }
    const double t = grid.node(k);
    out.times[k] = t;
    out.xs[k] = r.x();
    out.ys[k] = r.y();
    out.headings[k] = theta;
    out.report.times[k] = t;
    out.report.onthefly[k] = mi_at_node(prep.bundle, k, Q);
    out.report.rate[k] = info_rate(Q, delta, field.row(r), problem.sigma_n);

    if (k + 1 < n_nodes) {
      const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
      SensingModel leg;
      leg.n_z = 1;
      leg.sigma_n = problem.sigma_n;
      const Eigen::Vector2d r0 = r;
      const double v = problem.speed;
      const KernelField* f = problem.field;
      leg.C = [f, r0, v, dir, t](double tt) {
        return f->row(r0 + v * (tt - t) * dir);
      };
      Q = riccati_filter_propagate(problem.system, leg, Q, t, grid.step(), 1);
      r = r0 + v * grid.step() * dir;
    }
  }
  out.report.total_mi = out.report.onthefly.back();
  out.objective = out.report.total_mi;
  return out;
}

TrajectoryPlan plan_trajectory(const TrajectoryProblem& problem) {
  const TrajectoryPrep prep = prepare_trajectory(problem);

  // Start pool: evenly spaced constant headings, plus the gradient-steering
  // rollout sampled at the knot times so the myopic policy's basin is always
  // represented in the search.
  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(problem.multistart) + 1);
  for (int i = 0; i < problem.multistart; ++i) {
    const double angle = -kPi + 2.0 * kPi * static_cast<double>(i) /
                                    static_cast<double>(problem.multistart);
    starts.push_back(
        Vector::Constant(prep.knot_times.size(), clamp_angle(problem, angle)));
  }
  {
    const RolloutResult rollout = steer_rollout(problem, std::nullopt);
    Vector knots(prep.knot_times.size());
    double previous = 0.0;
    for (Eigen::Index j = 0; j < prep.knot_times.size(); ++j) {
      const auto node = static_cast<std::size_t>(std::min<long long>(
          std::llround(prep.knot_times(j) / prep.grid.step()),
          static_cast<long long>(rollout.headings.size()) - 1));
      double angle = rollout.headings[node];
      if (j > 0) {
        // Unwrap so linear interpolation between knots never swings the long
        // way around the circle.
        angle = previous + std::remainder(angle - previous, 2.0 * kPi);
      }
      knots(j) = clamp_angle(problem, angle);
      previous = knots(j);
    }
    starts.push_back(std::move(knots));
  }

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(outcomes.size(), [&](std::size_t i) {
    outcomes[i] = pattern_search(problem, prep, starts[i]);
  });

  std::size_t best = 0;
  std::int64_t evaluations = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    evaluations += outcomes[i].evaluations;
    if (outcomes[i].objective > outcomes[best].objective) best = i;
  }

  HeadingPath path(prep.knot_times, outcomes[best].angles, problem.start, problem.speed);
  const SensingModel sensing = path_sensing(problem, path);
  TrajectoryPlan plan{std::move(path), 0.0, trace_along_path(problem, prep, sensing),
                      evaluations, static_cast<int>(best)};
  plan.objective = plan.report.total_mi;
  if (std::abs(plan.objective - outcomes[best].objective) >
      1e-10 * std::max(1.0, std::abs(outcomes[best].objective))) {
    throw NumericalConsistencyError(
        "trajectory objective did not reproduce under re-evaluation");
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Information potential field

Matrix field_map(const Matrix& Q, const Matrix& delta, const KernelField& field,
                 const Matrix& sigma_n, const FieldLattice& lattice) {
  if (lattice.xs.empty() || lattice.ys.empty()) {
    throw ConfigError("field lattice must be nonempty");
  }
  if (Q.rows() != field.size() || delta.rows() != field.size()) {
    throw ConfigError("field covariance dimensions must match the kernel node count");
  }
  const Matrix kernel = info_gain_kernel(Q, delta);
  const auto llt = cholesky_spd(sigma_n, "Sigma_N");
  const std::size_t nx = lattice.xs.size();
  const std::size_t ny = lattice.ys.size();
  Matrix out(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  parallel_for(nx * ny, [&](std::size_t idx) {
    const std::size_t iy = idx / nx;
    const std::size_t ix = idx % nx;
    const Matrix C = field.row({lattice.xs[ix], lattice.ys[iy]});
    out(static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(ix)) =
        0.5 * llt.solve(C * kernel * C.transpose()).trace();
  });
  return out;
}

}  // namespace infoplan
