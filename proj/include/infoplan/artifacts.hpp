#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "infoplan/planners.hpp"

namespace infoplan::artifacts {

using json = nlohmann::ordered_json;

/// Every number in an emitted JSON document is wrapped as
/// {"value": v, "units": u} so downstream consumers never guess units.
json quantity(double value, const std::string& units);
json quantity(std::int64_t value, const std::string& units);

json point_json(const Eigen::Vector2d& p);

/// quantify: totals plus a self-audit of the on-the-fly trace.
json quantify_json(const InfoReport& report, const std::string& scenario, double tau);

json schedule_plan_json(const SchedulePlan& plan, const std::string& scenario,
                        const std::string& search, double tau);
json trajectory_plan_json(const TrajectoryPlan& plan, const std::string& scenario,
                          const TrajectoryProblem& problem);
json steer_json(const RolloutResult& rollout, const std::string& scenario,
                const TrajectoryProblem& problem);

/// Serialize with a trailing newline; parent directories are created.
void write_json(const std::filesystem::path& path, const json& doc);

/// All CSVs carry a header row and full 17-significant-digit doubles.
std::string format_full(double v);

void write_info_trace_csv(const std::filesystem::path& path, const InfoReport& report);
void write_schedule_csv(const std::filesystem::path& path, const SchedulePlan& plan);
void write_path_csv(const std::filesystem::path& path, const RolloutResult& rollout);
void write_path_csv(const std::filesystem::path& path, const HeadingPath& hp,
                    const std::vector<double>& times);
void write_field_csv(const std::filesystem::path& path, const FieldLattice& lattice,
                     const Matrix& rates);

}  // namespace infoplan::artifacts
