#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "infoplan/artifacts.hpp"

using namespace infoplan;
namespace fs = std::filesystem;
using artifacts::json;

namespace {

InfoReport tiny_report() {
  InfoReport r;
  r.times = {0.0, 0.5};
  r.onthefly = {0.0, 0.25};
  r.rate = {1.0, 2.0};
  r.total_mi = 0.25;
  r.j0_end = 0.5;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Every number in an artifact document must be the "value" of a
/// {"value", "units"} pair; collect the paths of any stray numbers.
void collect_bare_numbers(const json& j, const std::string& path,
                          std::vector<std::string>& bad) {
  if (j.is_object()) {
    if (j.size() == 2 && j.contains("value") && j.contains("units")) {
      if (!j["value"].is_number()) bad.push_back(path + ".value (non-number)");
      if (!j["units"].is_string()) bad.push_back(path + ".units (non-string)");
      return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      collect_bare_numbers(it.value(), path + "." + it.key(), bad);
    }
    return;
  }
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      collect_bare_numbers(j[i], path + "[" + std::to_string(i) + "]", bad);
    }
    return;
  }
  if (j.is_number()) bad.push_back(path);
}

fs::path fresh_dir() {
  const fs::path dir = fs::temp_directory_path() / "infoplan_artifacts_test";
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("quantities carry explicit units") {
  const json q = artifacts::quantity(1.5, "nats");
  CHECK(q["value"] == 1.5);
  CHECK(q["units"] == "nats");
  CHECK(q.size() == 2);

  const json n = artifacts::quantity(std::int64_t{7}, "count");
  CHECK(n["value"].is_number_integer());
  CHECK(n["value"] == 7);
}

TEST_CASE("full-precision formatting round-trips exactly") {
  for (const double v : {1.0 / 3.0, 0.1, 3.141592653589793, 1e300,
                         -2.2250738585072014e-308, 0.0, -17.25}) {
    CHECK(std::stod(artifacts::format_full(v)) == v);
  }
}

TEST_CASE("quantify document reports totals and a monotonicity audit") {
  const json doc = artifacts::quantify_json(tiny_report(), "tracking", 0.5);
  CHECK(doc["command"] == "quantify");
  CHECK(doc["scenario"] == "tracking");
  CHECK(doc["total_mi"]["value"] == 0.25);
  CHECK(doc["mi_upper_bound"]["value"] == 0.5);
  CHECK(doc["audit"]["onthefly_nondecreasing"] == true);

  InfoReport bad = tiny_report();
  bad.onthefly = {0.0, -1e-3};
  const json flagged = artifacts::quantify_json(bad, "tracking", 0.5);
  CHECK(flagged["audit"]["onthefly_nondecreasing"] == false);
  CHECK(flagged["audit"]["min_increment"]["value"] == -1e-3);
}

TEST_CASE("every number in every document is units-wrapped") {
  std::vector<std::string> bad;

  collect_bare_numbers(artifacts::quantify_json(tiny_report(), "tracking", 0.5), "quantify",
                       bad);

  SchedulePlan plan;
  plan.intervals = {{0.0, 0.25, {1, 3}}, {0.25, 0.5, {0}}};
  plan.objective = 0.25;
  plan.report = tiny_report();
  plan.report.interval_gains = {0.1, 0.15};
  plan.evaluations = 12;
  collect_bare_numbers(artifacts::schedule_plan_json(plan, "tracking", "greedy", 0.5),
                       "schedule", bad);

  TrajectoryProblem problem;
  problem.start = {0.5, 0.25};
  problem.speed = 40.0;
  problem.tau = 0.05;
  TrajectoryPlan tp;
  tp.path = HeadingPath((Vector(2) << 0.0, 0.05).finished(),
                        (Vector(2) << 0.1, 0.2).finished(), problem.start, problem.speed);
  tp.objective = 0.25;
  tp.report = tiny_report();
  tp.evaluations = 99;
  collect_bare_numbers(artifacts::trajectory_plan_json(tp, "forecast", problem), "trajectory",
                       bad);

  RolloutResult roll;
  roll.times = {0.0, 0.5};
  roll.xs = {0.0, 0.1};
  roll.ys = {0.0, 0.2};
  roll.headings = {0.3, 0.3};
  roll.objective = 0.25;
  roll.report = tiny_report();
  collect_bare_numbers(artifacts::steer_json(roll, "forecast", problem), "steer", bad);

  CAPTURE(bad);
  CHECK(bad.empty());
}

TEST_CASE("trace CSV bytes are stable") {
  const fs::path dir = fresh_dir();
  const fs::path file = dir / "trace.csv";
  artifacts::write_info_trace_csv(file, tiny_report());
  CHECK(slurp(file) == "t,mi,rate\n0,0,1\n0.5,0.25,2\n");
  fs::remove_all(dir);
}

TEST_CASE("schedule CSV lists sensors space-separated") {
  SchedulePlan plan;
  plan.intervals = {{0.0, 0.25, {1, 3}}, {0.25, 0.5, {0}}};
  const fs::path dir = fresh_dir();
  const fs::path file = dir / "schedule.csv";
  artifacts::write_schedule_csv(file, plan);
  CHECK(slurp(file) ==
        "interval,t_start,t_end,sensors\n0,0,0.25,1 3\n1,0.25,0.5,0\n");
  fs::remove_all(dir);
}

TEST_CASE("field CSV walks the lattice row-major with y outer") {
  const FieldLattice lattice{{0.0, 1.0}, {0.0, 2.0}};
  Matrix rates(2, 2);
  rates << 0.5, 0.75, 0.25, 0.125;
  const fs::path dir = fresh_dir();
  const fs::path file = dir / "field.csv";
  artifacts::write_field_csv(file, lattice, rates);
  CHECK(slurp(file) ==
        "x,y,rate\n0,0,0.5\n1,0,0.75\n0,2,0.25\n1,2,0.125\n");
  fs::remove_all(dir);
}

TEST_CASE("path CSV can sample a heading path at chosen times") {
  HeadingPath hp((Vector(2) << 0.0, 1.0).finished(), (Vector(2) << 0.0, 0.0).finished(),
                 {0.0, 0.0}, 2.0);
  const fs::path dir = fresh_dir();
  const fs::path file = dir / "path.csv";
  artifacts::write_path_csv(file, hp, {0.0, 0.5});
  CHECK(slurp(file) == "t,x,y,heading\n0,0,0,0\n0.5,1,0,0\n");
  fs::remove_all(dir);
}

TEST_CASE("JSON writing creates directories and round-trips") {
  const fs::path dir = fresh_dir();
  const fs::path file = dir / "nested" / "deeper" / "report.json";
  const json doc = artifacts::quantify_json(tiny_report(), "tracking", 0.5);
  artifacts::write_json(file, doc);

  const std::string text = slurp(file);
  REQUIRE(!text.empty());
  CHECK(text.back() == '\n');
  CHECK(json::parse(text) == doc);
  fs::remove_all(dir);
}
