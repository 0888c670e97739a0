#include "infoplan/artifacts.hpp"

#include <cstdio>
#include <fstream>

namespace infoplan::artifacts {

namespace {

const char* kNats = "nats";
const char* kTime = "model_time";
const char* kGrid = "grid_units";

json quantity_list(const std::vector<double>& values, const std::string& units) {
  json out = json::array();
  for (const double v : values) out.push_back(quantity(v, units));
  return out;
}

void open_out(std::ofstream& out, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out.open(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
}

/// Smallest increment of the accumulated trace; the audit flag turns false
/// if accumulation ever steps backward beyond roundoff.
json trace_audit(const InfoReport& report) {
  double min_increment = 0.0;
  bool first = true;
  for (std::size_t i = 1; i < report.onthefly.size(); ++i) {
    const double inc = report.onthefly[i] - report.onthefly[i - 1];
    if (first || inc < min_increment) {
      min_increment = inc;
      first = false;
    }
  }
  json audit;
  audit["onthefly_nondecreasing"] = first || min_increment >= -1e-9;
  audit["min_increment"] = quantity(first ? 0.0 : min_increment, kNats);
  return audit;
}

}  // namespace

json quantity(double value, const std::string& units) {
  json q;
  q["value"] = value;
  q["units"] = units;
  return q;
}

json quantity(std::int64_t value, const std::string& units) {
  json q;
  q["value"] = value;
  q["units"] = units;
  return q;
}

json point_json(const Eigen::Vector2d& p) {
  json out;
  out["x"] = quantity(p.x(), kGrid);
  out["y"] = quantity(p.y(), kGrid);
  return out;
}

json quantify_json(const InfoReport& report, const std::string& scenario, double tau) {
  json out;
  out["command"] = "quantify";
  out["scenario"] = scenario;
  out["horizon"] = quantity(tau, kTime);
  out["total_mi"] = quantity(report.total_mi, kNats);
  out["mi_upper_bound"] = quantity(report.j0_end, kNats);
  if (!report.interval_gains.empty()) {
    out["interval_gains"] = quantity_list(report.interval_gains, kNats);
  }
  out["audit"] = trace_audit(report);
  return out;
}

json schedule_plan_json(const SchedulePlan& plan, const std::string& scenario,
                        const std::string& search, double tau) {
  json out;
  out["command"] = "plan";
  out["mode"] = "schedule";
  out["scenario"] = scenario;
  out["search"] = search;
  out["horizon"] = quantity(tau, kTime);
  out["objective"] = quantity(plan.objective, kNats);
  out["mi_upper_bound"] = quantity(plan.report.j0_end, kNats);
  out["evaluations"] = quantity(plan.evaluations, "count");
  json intervals = json::array();
  for (std::size_t i = 0; i < plan.intervals.size(); ++i) {
    const ScheduleChoice& c = plan.intervals[i];
    json row;
    row["t_start"] = quantity(c.t_start, kTime);
    row["t_end"] = quantity(c.t_end, kTime);
    json sensors = json::array();
    for (const int s : c.sensors) sensors.push_back(quantity(std::int64_t{s}, "index"));
    row["sensors"] = sensors;
    if (i < plan.report.interval_gains.size()) {
      row["gain"] = quantity(plan.report.interval_gains[i], kNats);
    }
    intervals.push_back(row);
  }
  out["intervals"] = intervals;
  out["audit"] = trace_audit(plan.report);
  return out;
}

json trajectory_plan_json(const TrajectoryPlan& plan, const std::string& scenario,
                          const TrajectoryProblem& problem) {
  json out;
  out["command"] = "plan";
  out["mode"] = "trajectory";
  out["scenario"] = scenario;
  out["horizon"] = quantity(problem.tau, kTime);
  out["objective"] = quantity(plan.objective, kNats);
  out["mi_upper_bound"] = quantity(plan.report.j0_end, kNats);
  out["evaluations"] = quantity(plan.evaluations, "count");
  out["best_start"] = quantity(std::int64_t{plan.best_start}, "index");
  out["start"] = point_json(problem.start);
  out["speed"] = quantity(problem.speed, "grid_units_per_model_time");
  json knots = json::array();
  const Vector& kt = plan.path.knot_times();
  const Vector& ka = plan.path.knot_angles();
  for (Eigen::Index i = 0; i < kt.size(); ++i) {
    json knot;
    knot["t"] = quantity(kt[i], kTime);
    knot["heading"] = quantity(ka[i], "radians");
    knots.push_back(knot);
  }
  out["knots"] = knots;
  out["audit"] = trace_audit(plan.report);
  return out;
}

json steer_json(const RolloutResult& rollout, const std::string& scenario,
                const TrajectoryProblem& problem) {
  json out;
  out["command"] = "plan";
  out["mode"] = "steer";
  out["scenario"] = scenario;
  out["horizon"] = quantity(problem.tau, kTime);
  out["objective"] = quantity(rollout.objective, kNats);
  out["mi_upper_bound"] = quantity(rollout.report.j0_end, kNats);
  out["start"] = point_json(problem.start);
  out["speed"] = quantity(problem.speed, "grid_units_per_model_time");
  out["audit"] = trace_audit(rollout.report);
  return out;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out;
  open_out(out, path);
  out << doc.dump(2) << '\n';
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_info_trace_csv(const std::filesystem::path& path, const InfoReport& report) {
  std::ofstream out;
  open_out(out, path);
  out << "t,mi,rate\n";
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    out << format_full(report.times[i]) << ',' << format_full(report.onthefly[i]) << ','
        << format_full(report.rate[i]) << '\n';
  }
}

void write_schedule_csv(const std::filesystem::path& path, const SchedulePlan& plan) {
  std::ofstream out;
  open_out(out, path);
  out << "interval,t_start,t_end,sensors\n";
  for (std::size_t i = 0; i < plan.intervals.size(); ++i) {
    const ScheduleChoice& c = plan.intervals[i];
    out << i << ',' << format_full(c.t_start) << ',' << format_full(c.t_end) << ',';
    for (std::size_t j = 0; j < c.sensors.size(); ++j) {
      if (j) out << ' ';
      out << c.sensors[j];
    }
    out << '\n';
  }
}

void write_path_csv(const std::filesystem::path& path, const RolloutResult& rollout) {
  std::ofstream out;
  open_out(out, path);
  out << "t,x,y,heading\n";
  for (std::size_t i = 0; i < rollout.times.size(); ++i) {
    out << format_full(rollout.times[i]) << ',' << format_full(rollout.xs[i]) << ','
        << format_full(rollout.ys[i]) << ',' << format_full(rollout.headings[i]) << '\n';
  }
}

void write_path_csv(const std::filesystem::path& path, const HeadingPath& hp,
                    const std::vector<double>& times) {
  std::ofstream out;
  open_out(out, path);
  out << "t,x,y,heading\n";
  for (const double t : times) {
    const Eigen::Vector2d r = hp.position(t);
    out << format_full(t) << ',' << format_full(r.x()) << ',' << format_full(r.y()) << ','
        << format_full(hp.heading(t)) << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const FieldLattice& lattice,
                     const Matrix& rates) {
  std::ofstream out;
  open_out(out, path);
  out << "x,y,rate\n";
  for (std::size_t iy = 0; iy < lattice.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < lattice.xs.size(); ++ix) {
      out << format_full(lattice.xs[ix]) << ',' << format_full(lattice.ys[iy]) << ','
          << format_full(rates(static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(ix)))
          << '\n';
    }
  }
}

}  // namespace infoplan::artifacts
