#include "tether/runner.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace tether {

using nlohmann::json;

const char* to_string(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::omms: return "omms";
    case PlannerMode::omms_cmms: return "omms+cmms";
    case PlannerMode::handover: return "handover";
  }
  return "?";
}

std::optional<PlannerMode> parse_mode(const std::string& text) {
  for (PlannerMode m : {PlannerMode::omms, PlannerMode::omms_cmms, PlannerMode::handover})
    if (text == to_string(m)) return m;
  return std::nullopt;
}

std::vector<ReportRow> report_rows(const MotionSequence& sequence) {
  std::vector<ReportRow> rows;
  rows.reserve(sequence.states.size());
  for (const PlanState& s : sequence.states)
    rows.push_back({s.step, s.phase, s.acc_ee, s.acc_tool, s.cable_clearance, s.cable_collision});
  return rows;
}

RunSummary summarize(const std::vector<ReportRow>& rows) {
  RunSummary s;
  s.success = !rows.empty();
  double sum = 0.0;
  for (const ReportRow& r : rows) {
    s.max_acc = std::max(s.max_acc, r.acc_ee);
    sum += r.acc_ee;
    if (r.collision) ++s.collisions;
  }
  if (!rows.empty()) s.mean_acc = sum / static_cast<double>(rows.size());
  return s;
}

namespace {

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (c == '+') c = '_';
  return out;
}

MotionSequence plan_mode(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals,
                         PlannerMode mode, std::uint64_t seed) {
  const SceneConfig& scene = *ctx.scene;
  switch (mode) {
    case PlannerMode::omms: return plan_omms(ctx, start, goals, seed);
    case PlannerMode::handover: return plan_handover(ctx, start, goals, seed);
    case PlannerMode::omms_cmms: break;
  }
  std::string failures;
  for (int attempt = 0; attempt <= scene.planner.replan_attempts; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(attempt));
    const MotionSequence omms = plan_omms(ctx, start, goals, s);
    try {
      return plan_cmms(ctx, omms, scene.cmms.alpha_s, scene.cmms.acc_threshold, mix_seed(s, 0xC0FFEE));
    } catch (const PlanningError& e) {
      if (e.kind() != PlanErrorKind::replan_omms) throw;
      failures += (failures.empty() ? "" : " | ") + std::string(e.what());
    }
  }
  throw PlanningError(PlanErrorKind::replan_omms, failures);
}

}  // namespace

RunReport run_task(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals, PlannerMode mode,
                   std::uint64_t seed) {
  RunReport report;
  report.mode = mode;
  report.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    report.sequence = plan_mode(ctx, start, goals, mode, seed);
    report.rows = report_rows(report.sequence);
    report.summary = summarize(report.rows);
  } catch (const PlanningError& e) {
    report.summary = RunSummary{};
    report.summary.failure = e.what();
    report.exit_code = 2;
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RunReport run_benchmark(const SceneConfig& scene, const GraspDatabase& grasps, int id, PlannerMode mode,
                        std::uint64_t seed) {
  const std::vector<Posed> goals = scene.benchmark_goals(id);
  const PlanContext ctx(scene, grasps);
  RunReport report = run_task(ctx, scene.benchmark_start, goals, mode, seed);
  report.name = "benchmark_" + std::to_string(id) + "_" + to_string(mode);
  return report;
}

void write_rows_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
  out << "step,phase,acc_ee,acc_tool,cable_clearance,collision\n";
  char buf[192];
  for (const ReportRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%d\n", r.step, to_string(r.phase), r.acc_ee, r.acc_tool,
                  r.cable_clearance, r.collision ? 1 : 0);
    out << buf;
  }
}

std::vector<ReportRow> read_rows_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw std::runtime_error("report row needs 6 fields: " + line);
    ReportRow r;
    r.step = std::stoul(f[0]);
    bool known = false;
    for (Phase p : {Phase::approach, Phase::transfer, Phase::place, Phase::cable_follow}) {
      if (f[1] == to_string(p)) {
        r.phase = p;
        known = true;
      }
    }
    if (!known) throw std::runtime_error("unknown phase " + f[1]);
    r.acc_ee = std::strtod(f[2].c_str(), nullptr);
    r.acc_tool = std::strtod(f[3].c_str(), nullptr);
    r.cable_clearance = std::strtod(f[4].c_str(), nullptr);
    r.collision = f[5] == "1";
    rows.push_back(r);
  }
  return rows;
}

void write_summary_json(const RunReport& report, std::ostream& out) {
  json j;
  j["name"] = report.name;
  j["mode"] = to_string(report.mode);
  j["seed"] = report.seed;
  j["success"] = report.exit_code == 0;
  j["states"] = report.rows.size();
  j["max_acc_ee"] = report.summary.max_acc;
  j["mean_acc_ee"] = report.summary.mean_acc;
  j["collisions"] = report.summary.collisions;
  j["failure"] = report.summary.failure;
  if (report.exit_code == 0) {
    j["tool_arm"] = to_string(report.sequence.tool_arm);
    if (report.sequence.tool_grasp) j["tool_grasp"] = *report.sequence.tool_grasp;
    if (report.sequence.slider_grasp) j["slider_grasp"] = *report.sequence.slider_grasp;
  }
  out << j.dump(2) << "\n";
}

namespace {

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json pose_json(const Posed& p) { return {{"xyz", vec_json(p.translation)}, {"rpy", vec_json(to_rpy_deg(p.rotation))}}; }

}  // namespace

void write_trace_jsonl(const MotionSequence& sequence, std::ostream& out) {
  for (const PlanState& s : sequence.states) {
    json j;
    j["step"] = s.step;
    j["phase"] = to_string(s.phase);
    j["tool_arm"] = to_string(s.tool_arm);
    j["q_right"] = vec_json(s.q[index_of(ArmSide::right)]);
    j["q_left"] = vec_json(s.q[index_of(ArmSide::left)]);
    j["tool"] = pose_json(s.tool_pose);
    j["tool_grasped"] = s.tool_grasped;
    j["slider"] = s.slider_pose ? pose_json(*s.slider_pose) : json(nullptr);
    j["slider_grasped"] = s.slider_grasped;
    j["slider_reach"] = s.slider_reach;
    j["time_scaled"] = s.time_scaled;
    json cable = json::array();
    for (const Vector3d& p : s.cable.waypoints()) cable.push_back(vec_json(p));
    j["cable"] = cable;
    j["acc_ee"] = s.acc_ee;
    j["acc_tool"] = s.acc_tool;
    j["cable_clearance"] = s.cable_clearance;
    j["cable_collision"] = s.cable_collision;
    out << j.dump() << "\n";
  }
}

void save_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = file_stem(report.name);
  auto open = [&](const std::string& file) {
    std::ofstream f(dir / file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / file).string());
    return f;
  };
  {
    auto f = open(stem + ".csv");
    write_rows_csv(report.rows, f);
  }
  {
    auto f = open(stem + "_summary.json");
    write_summary_json(report, f);
  }
  auto f = open(stem + "_trace.jsonl");
  write_trace_jsonl(report.sequence, f);
}

OrientedBoxd place_obstacle(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals,
                            std::uint64_t seed) {
  const SceneConfig& scene = *ctx.scene;
  const ObstacleTrialParams& p = scene.obstacle;
  const OrientedBoxd& table = scene.table;
  const double top = table.pose.translation.z() + table.half_extents.z();
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  std::vector<Vector3d> footprints{start.translation};
  for (const Posed& g : goals) footprints.push_back(g.translation);
  const CableState initial = tool_cable(scene, start, std::nullopt);

  for (int attempt = 0; attempt < 10000; ++attempt) {
    OrientedBoxd box;
    for (int a = 0; a < 3; ++a) box.half_extents[a] = uniform(p.box_min_half[a], p.box_max_half[a]);
    box.pose.rotation = rot_z(uniform(0.0, 180.0));
    const Vector3d c = table.pose.translation;
    box.pose.translation = Vector3d(uniform(c.x() - table.half_extents.x(), c.x() + table.half_extents.x()),
                                    uniform(c.y() - table.half_extents.y(), c.y() + table.half_extents.y()),
                                    top + box.half_extents.z());
    bool ok = true;
    for (const Vector3d& f : footprints) {
      const Vector3d at_box_height(f.x(), f.y(), box.pose.translation.z());
      if (point_box_signed_distance(at_box_height, box) < p.footprint_clearance) ok = false;
    }
    if (!ok) continue;
    SceneObstacles only_box;
    only_box.boxes = {box};
    only_box.margin = scene.margin;
    if (!robot_collision_free(scene.robot, scene.robot.home, {}, only_box).free) continue;
    if (!cable_clear(initial, scene.robot, scene.robot.home, only_box, {}).clear) continue;
    return box;
  }
  throw std::runtime_error("no admissible obstacle placement");
}

ObstacleTable run_obstacle_trials(const SceneConfig& scene, const GraspDatabase& grasps, int trials,
                                  std::uint64_t seed) {
  if (scene.anchor.mode != AnchorMode::table_corner)
    throw std::invalid_argument("obstacle trials need the table-corner anchor");
  std::vector<Posed> goals;
  for (int g : scene.obstacle.goals) goals.push_back(scene.goal_poses.at(static_cast<std::size_t>(g - 1)));

  auto outcome = [](const RunReport& r) {
    TrialOutcome o;
    o.planned = r.exit_code == 0;
    o.collisions = r.summary.collisions;
    o.success = o.planned && o.collisions == 0;
    o.mean_acc = r.summary.mean_acc;
    o.failure = r.summary.failure;
    return o;
  };

  ObstacleTable table;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(i) + 1);
    PlanContext ctx(scene, grasps);
    ObstacleTrial t;
    t.index = i + 1;
    t.box = place_obstacle(ctx, scene.obstacle.start, goals, trial_seed);
    ctx.add_box(t.box);
    t.omms = outcome(run_task(ctx, scene.obstacle.start, goals, PlannerMode::omms, trial_seed));
    t.cmms = outcome(run_task(ctx, scene.obstacle.start, goals, PlannerMode::omms_cmms, trial_seed));
    table.omms_successes += t.omms.success;
    table.cmms_successes += t.cmms.success;
    table.trials.push_back(std::move(t));
  }
  return table;
}

void write_trials_csv(const ObstacleTable& table, std::ostream& out) {
  out << "trial,box_x,box_y,box_z,half_x,half_y,half_z,yaw_deg,"
         "omms_success,omms_collisions,omms_mean_acc,cmms_success,cmms_collisions,cmms_mean_acc,cmms_failure\n";
  char buf[512];
  for (const ObstacleTrial& t : table.trials) {
    const Vector3d& c = t.box.pose.translation;
    const Vector3d& h = t.box.half_extents;
    const double yaw = rad2deg(std::atan2(t.box.pose.rotation(1, 0), t.box.pose.rotation(0, 0)));
    std::snprintf(buf, sizeof buf, "%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%d,%zu,%.17g,%d,%zu,%.17g,", t.index, c.x(),
                  c.y(), c.z(), h.x(), h.y(), h.z(), yaw, t.omms.success ? 1 : 0, t.omms.collisions, t.omms.mean_acc,
                  t.cmms.success ? 1 : 0, t.cmms.collisions, t.cmms.mean_acc);
    std::string failure = t.cmms.failure;
    for (char& ch : failure)
      if (ch == ',' || ch == '\n') ch = ';';
    out << buf << failure << "\n";
  }
}

void write_trials_summary_csv(const ObstacleTable& table, std::ostream& out) {
  out << "planner,success,collisions,failures,mean_acc\n";
  auto row = [&](const char* name, auto pick) {
    int success = 0, collided = 0, failed = 0;
    double acc = 0.0;
    int planned = 0;
    for (const ObstacleTrial& t : table.trials) {
      const TrialOutcome& o = pick(t);
      if (!o.planned) {
        ++failed;
        continue;
      }
      ++planned;
      acc += o.mean_acc;
      if (o.success) ++success;
      else ++collided;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.17g\n", name, success, collided, failed, planned ? acc / planned : 0.0);
    out << buf;
  };
  row("omms", [](const ObstacleTrial& t) -> const TrialOutcome& { return t.omms; });
  row("omms+cmms", [](const ObstacleTrial& t) -> const TrialOutcome& { return t.cmms; });
}

WorkspaceAnalysis analyze_workspace(const SceneConfig& scene, const GraspDatabase& grasps, std::uint64_t seed,
                                    std::optional<double> spacing) {
  const WorkspaceParams& w = scene.workspace;
  WorkspaceAnalysis a;
  ReachOptions reach;
  reach.restarts = w.ik_restarts;
  reach.seed = seed;
  a.grid = build_reach_grid(scene.robot, {w.lower, w.upper, spacing.value_or(w.spacing)}, reach);
  a.columns = score_balancer_columns(a.grid);

  FieldContext field;
  field.robot = &scene.robot;
  field.arm = w.cable_arm;
  field.object = &scene.slider;
  field.grasps = &grasps.at(scene.slider.name);
  field.object_rotation = scene.slider_rotation;
  field.obstacles = scene.obstacles();
  field.ik = reach;
  manipulability_field(a.grid, field);

  // The reference is the grid point nearest the configured one.
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < a.grid.size(); ++i) {
    if ((a.grid.point(i) - w.reference).squaredNorm() < (a.grid.point(nearest) - w.reference).squaredNorm())
      nearest = i;
  }
  a.reference.position = a.grid.point(nearest);
  a.reference.M = a.grid.M[nearest];
  a.reference.G = a.grid.G[nearest];
  if (a.reference.G > 0) a.sphere = manipulability_sphere(a.grid, a.reference, w.m_fraction, w.g_fraction);
  else a.sphere.reference = a.reference.position;
  return a;
}

void save_workspace(const WorkspaceAnalysis& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "grid.csv", std::ios::binary);
    write_grid_csv(a.grid, f);
  }
  {
    std::ofstream f(dir / "columns.csv", std::ios::binary);
    f << "rank,x,y,count\n";
    for (std::size_t i = 0; i < a.columns.size(); ++i)
      f << i + 1 << "," << a.columns[i].x << "," << a.columns[i].y << "," << a.columns[i].count << "\n";
  }
  std::ofstream f(dir / "sphere.csv", std::ios::binary);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%.17g,%d,%.17g,%.17g,%d,%zu\n", a.sphere.reference.x(),
                a.sphere.reference.y(), a.sphere.reference.z(), a.sphere.reference_M, a.sphere.reference_G,
                a.sphere.radius, a.sphere.min_M, a.sphere.min_G, a.sphere.points);
  f << "ref_x,ref_y,ref_z,ref_M,ref_G,radius,min_M,min_G,points\n" << buf;
}

}  // namespace tether
