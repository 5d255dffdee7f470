#pragma once

// Benchmark and obstacle-trial protocols, workspace analysis and the report
// files they write.

#include "tether/cmms.hpp"
#include "tether/workspace.hpp"

#include <filesystem>
#include <iosfwd>

namespace tether {

enum class PlannerMode { omms, omms_cmms, handover };

const char* to_string(PlannerMode mode);
/// "omms", "omms+cmms" or "handover".
std::optional<PlannerMode> parse_mode(const std::string& text);

struct ReportRow {
  std::size_t step = 0;
  Phase phase = Phase::approach;
  double acc_ee = 0.0;
  double acc_tool = 0.0;
  double cable_clearance = 0.0;
  bool collision = false;
};

struct RunSummary {
  bool success = false;
  double max_acc = 0.0;    // acc_ee
  double mean_acc = 0.0;
  std::size_t collisions = 0;   // states with a cable collision
  std::string failure;          // planning error, empty on success
};

struct RunReport {
  std::string name;
  PlannerMode mode = PlannerMode::omms;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  RunSummary summary;
  MotionSequence sequence;
  int exit_code = 0;            // 0 planned, 2 planning failure
  double wall_time_s = 0.0;     // printed, never written to report files
};

/// Rows from a replayed sequence and the summary recomputed from them.
std::vector<ReportRow> report_rows(const MotionSequence& sequence);
RunSummary summarize(const std::vector<ReportRow>& rows);

/// Plans one task in the given mode. In omms+cmms mode a CMMS failure
/// triggers a fresh OMMS (new seed) up to planner.replan_attempts times.
/// Planning failures are recorded in the report, not thrown.
RunReport run_task(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals, PlannerMode mode,
                   std::uint64_t seed);

RunReport run_benchmark(const SceneConfig& scene, const GraspDatabase& grasps, int id, PlannerMode mode,
                        std::uint64_t seed);

/// CSV: step,phase,acc_ee,acc_tool,cable_clearance,collision.
void write_rows_csv(const std::vector<ReportRow>& rows, std::ostream& out);
std::vector<ReportRow> read_rows_csv(std::istream& in);
/// JSON object with the summary fields.
void write_summary_json(const RunReport& report, std::ostream& out);
/// One JSON record per state: joints, tool and slider poses, cable points,
/// accumulation.
void write_trace_jsonl(const MotionSequence& sequence, std::ostream& out);

/// Writes <name>.csv, <name>_summary.json and <name>_trace.jsonl into `dir`.
void save_report(const RunReport& report, const std::filesystem::path& dir);

struct TrialOutcome {
  bool success = false;        // planned and no cable collision
  bool planned = false;
  std::size_t collisions = 0;
  double mean_acc = 0.0;
  std::string failure;
};

struct ObstacleTrial {
  int index = 0;
  OrientedBoxd box;
  TrialOutcome omms;
  TrialOutcome cmms;
};

struct ObstacleTable {
  std::vector<ObstacleTrial> trials;
  int omms_successes = 0;
  int cmms_successes = 0;
};

/// Box on the table, uniform over the table top with its footprint kept
/// `footprint_clearance` away from the start and goal positions, clear of the
/// robot at home and of the initial cable.
OrientedBoxd place_obstacle(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals,
                            std::uint64_t seed);

/// Table-corner anchor trials: per trial a random box, then OMMS and
/// OMMS+CMMS on the same task. Requires the table-corner anchor mode.
ObstacleTable run_obstacle_trials(const SceneConfig& scene, const GraspDatabase& grasps, int trials,
                                  std::uint64_t seed);

/// Per-trial rows, then a planner,success,collisions,failures,mean_acc table.
void write_trials_csv(const ObstacleTable& table, std::ostream& out);
void write_trials_summary_csv(const ObstacleTable& table, std::ostream& out);

struct WorkspaceAnalysis {
  ReachGrid grid;
  std::vector<ColumnScore> columns;
  FieldSample reference;
  SphereReport sphere;
};

/// Reach grid, balancer column ranking, slider manipulability field and
/// sphere around the configured reference point.
WorkspaceAnalysis analyze_workspace(const SceneConfig& scene, const GraspDatabase& grasps, std::uint64_t seed,
                                    std::optional<double> spacing = std::nullopt);

/// Writes grid.csv, columns.csv and sphere.csv into `dir`.
void save_workspace(const WorkspaceAnalysis& analysis, const std::filesystem::path& dir);

}  // namespace tether
