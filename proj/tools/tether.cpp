// Command-line front end: workspace analysis, planning, benchmarks, obstacle
// trials and grasp database generation.

#include "tether/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace tether;

struct Common {
  std::string scene_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scene", c.scene_path, "scene JSON (defaults built in when omitted)");
  cmd->add_option("--seed", c.seed, "RNG seed (defaults to the scene's)");
  cmd->add_option("--out", c.out, "output directory");
}

SceneConfig load(const Common& c) { return c.scene_path.empty() ? default_scene() : load_scene(c.scene_path); }

std::uint64_t seed_of(const Common& c, const SceneConfig& scene) { return c.seed.value_or(scene.seed); }

PlannerMode mode_of(const std::string& text) {
  const auto m = parse_mode(text);
  if (!m) throw std::invalid_argument("unknown mode '" + text + "' (omms, omms+cmms, handover)");
  return *m;
}

int report(const RunReport& r, const std::filesystem::path& out) {
  save_report(r, out);
  if (r.exit_code == 0) {
    std::printf("%s: %zu states, max acc_ee %.3f deg, mean %.3f deg, %zu cable collisions, %.2f s\n", r.name.c_str(),
                r.rows.size(), r.summary.max_acc, r.summary.mean_acc, r.summary.collisions, r.wall_time_s);
  } else {
    std::printf("%s: planning failed after %.2f s: %s\n", r.name.c_str(), r.wall_time_s, r.summary.failure.c_str());
  }
  return r.exit_code;
}

std::vector<int> parse_indices(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(std::stoi(cell));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-arm tool and cable manipulation planner"};
  app.require_subcommand(1);

  Common common;
  int bench_id = 1;
  std::string mode_text = "omms+cmms";
  std::string goals_text;
  int trials = 10;
  std::optional<double> spacing;

  auto* workspace = app.add_subcommand("analyze-workspace", "reach grid, balancer ranking, manipulability sphere");
  add_common(workspace, common);
  workspace->add_option("--spacing", spacing, "grid spacing in mm (scene value by default)");

  auto* plan = app.add_subcommand("plan", "plan one task from the benchmark start through listed goal poses");
  add_common(plan, common);
  plan->add_option("--goals", goals_text, "comma-separated 1-based goal pose indices")->required();
  plan->add_option("--mode", mode_text, "omms, omms+cmms or handover");

  auto* bench = app.add_subcommand("benchmark", "run one of the shipped benchmarks");
  add_common(bench, common);
  bench->add_option("--id", bench_id, "benchmark id")->required();
  bench->add_option("--mode", mode_text, "omms, omms+cmms or handover");

  auto* obstacle = app.add_subcommand("obstacle-trials", "random-box trials with the table-corner anchor");
  add_common(obstacle, common);
  obstacle->add_option("--n", trials, "number of trials");

  auto* grasps = app.add_subcommand("gen-grasps", "write the grasp database of the scene's tool and slider");
  add_common(grasps, common);

  auto* dump = app.add_subcommand("dump-scene", "print the scene as JSON (the built-in defaults without --scene)");
  dump->add_option("--scene", common.scene_path, "scene JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    SceneConfig scene = load(common);
    const std::uint64_t seed = seed_of(common, scene);
    const std::filesystem::path out = common.out;

    if (dump->parsed()) {
      std::printf("%s\n", scene_to_json(scene).c_str());
      return 0;
    }
    if (grasps->parsed()) {
      std::filesystem::create_directories(out);
      generate_scene_grasps(scene).save((out / "grasps.txt").string());
      std::printf("wrote %s\n", (out / "grasps.txt").string().c_str());
      return 0;
    }
    const GraspDatabase db = scene_grasps(scene);

    if (workspace->parsed()) {
      const WorkspaceAnalysis a = analyze_workspace(scene, db, seed, spacing);
      save_workspace(a, out);
      std::size_t omega = 0;
      for (std::size_t i = 0; i < a.grid.size(); ++i) omega += a.grid.omega(i);
      std::printf("grid %dx%dx%d, %zu dual-reachable points\n", a.grid.dims[0], a.grid.dims[1], a.grid.dims[2], omega);
      if (!a.columns.empty())
        std::printf("best balancer column (%.0f, %.0f) with %d levels\n", a.columns[0].x, a.columns[0].y,
                    a.columns[0].count);
      std::printf("sphere at (%.0f, %.0f, %.0f): radius %.1f mm, M_ref %.4g, G_ref %d\n", a.sphere.reference.x(),
                  a.sphere.reference.y(), a.sphere.reference.z(), a.sphere.radius, a.sphere.reference_M,
                  a.sphere.reference_G);
      return 0;
    }
    if (plan->parsed()) {
      std::vector<Posed> goals;
      for (int g : parse_indices(goals_text)) {
        if (g < 1 || g > static_cast<int>(scene.goal_poses.size()))
          throw std::invalid_argument("goal index " + std::to_string(g) + " out of range");
        goals.push_back(scene.goal_poses[static_cast<std::size_t>(g - 1)]);
      }
      const PlanContext ctx(scene, db);
      RunReport r = run_task(ctx, scene.benchmark_start, goals, mode_of(mode_text), seed);
      r.name = std::string("plan_") + to_string(r.mode);
      return report(r, out);
    }
    if (bench->parsed()) {
      if (bench_id < 1 || bench_id > static_cast<int>(scene.benchmarks.size()))
        throw std::invalid_argument("benchmark id " + std::to_string(bench_id) + " out of range");
      return report(run_benchmark(scene, db, bench_id, mode_of(mode_text), seed), out);
    }
    if (obstacle->parsed()) {
      if (scene.anchor.mode != AnchorMode::table_corner) {
        std::printf("switching the cable anchor to the table corner\n");
        scene.anchor.mode = AnchorMode::table_corner;
      }
      const ObstacleTable table = run_obstacle_trials(scene, db, trials, seed);
      std::filesystem::create_directories(out);
      std::ofstream rows(out / "obstacle_trials.csv", std::ios::binary);
      write_trials_csv(table, rows);
      std::ofstream summary(out / "obstacle_summary.csv", std::ios::binary);
      write_trials_summary_csv(table, summary);
      write_trials_summary_csv(table, std::cout);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
