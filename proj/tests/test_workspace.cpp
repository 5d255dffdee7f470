#include "support.hpp"
#include "tether/collision.hpp"
#include "tether/scene.hpp"
#include "tether/workspace.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace tether;

namespace {

GridBounds coarse_bounds() {
  const SceneConfig s = default_scene();
  return {s.workspace.lower, s.workspace.upper, 300.0};
}

ReachGrid synthetic_grid(test::Gen& g, int nx, int ny, int nz) {
  ReachGrid grid;
  grid.origin = Vector3d(0, 0, 0);
  grid.spacing = 50.0;
  grid.dims = {nx, ny, nz};
  grid.reach_right.resize(grid.size());
  grid.reach_left.resize(grid.size());
  grid.M.resize(grid.size());
  grid.G.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.reach_right[i] = g.uniform(0, 1) < 0.7;
    grid.reach_left[i] = g.uniform(0, 1) < 0.7;
    grid.G[i] = g.integer(0, 8);
    grid.M[i] = grid.G[i] ? g.uniform(0.001, 0.02) : 0.0;
  }
  return grid;
}

// Largest distance r to a grid point such that every point within r passes.
double brute_radius(const ReachGrid& grid, const FieldSample& ref, double mf, double gf) {
  double best = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double r = (grid.point(c) - ref.position).norm();
    bool ok = true;
    for (std::size_t i = 0; i < grid.size() && ok; ++i) {
      if ((grid.point(i) - ref.position).norm() > r + 1e-9) continue;
      ok = grid.M[i] >= mf * ref.M && grid.G[i] >= gf * ref.G;
    }
    if (ok) best = std::max(best, r);
  }
  return best;
}

}  // namespace

TEST_CASE("reach grid: omega is the intersection, build is deterministic") {
  const Robot robot = default_robot();
  ReachOptions opt;
  opt.seed = 3;
  const ReachGrid a = build_reach_grid(robot, coarse_bounds(), opt);
  const ReachGrid b = build_reach_grid(robot, coarse_bounds(), opt);
  CHECK(a.dims == std::array<int, 3>{3, 5, 5});
  CHECK(a.reach_right == b.reach_right);
  CHECK(a.reach_left == b.reach_left);
  std::size_t omega = 0, right = 0, left = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.omega(i) == (a.reachable(ArmSide::right, i) && a.reachable(ArmSide::left, i)));
    omega += a.omega(i);
    right += a.reachable(ArmSide::right, i);
    left += a.reachable(ArmSide::left, i);
  }
  CHECK(omega > 0);
  CHECK(omega <= std::min(right, left));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto c = a.cell(i);
    CHECK(a.index(c[0], c[1], c[2]) == i);
  }
}

TEST_CASE("point reachability") {
  const Robot robot = default_robot();
  ReachOptions opt;
  const ArmModel& right = robot.arm(ArmSide::right);
  // Directly in front of the mount, well inside the arm's reach.
  CHECK(point_reachable(right, right.base.translation + Vector3d(400, 0, 300), opt, 1));
  CHECK_FALSE(point_reachable(right, Vector3d(10000, 0, 0), opt, 1));
  for (const Matrix3d& r : canonical_orientations()) CHECK(orthonormality_error(r) < 1e-12);
}

TEST_CASE("column ranking") {
  test::Gen g(71);
  for (int trial = 0; trial < 20; ++trial) {
    ReachGrid grid = synthetic_grid(g, 4, 5, 6);
    const auto cols = score_balancer_columns(grid);
    REQUIRE(cols.size() == 20);
    for (std::size_t i = 0; i + 1 < cols.size(); ++i) {
      CHECK(cols[i].count >= cols[i + 1].count);
      if (cols[i].count == cols[i + 1].count) {
        CHECK(cols[i].x >= cols[i + 1].x);
        if (cols[i].x == cols[i + 1].x) CHECK(std::abs(cols[i].y) <= std::abs(cols[i + 1].y));
      }
    }
    // Counts are independent of the z order of the levels.
    ReachGrid flipped = grid;
    for (int k = 0; k < 6; ++k)
      for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 4; ++i) {
          flipped.reach_right[flipped.index(i, j, k)] = grid.reach_right[grid.index(i, j, 5 - k)];
          flipped.reach_left[flipped.index(i, j, k)] = grid.reach_left[grid.index(i, j, 5 - k)];
        }
    const auto again = score_balancer_columns(flipped);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      CHECK(again[i].count == cols[i].count);
      CHECK(again[i].x == cols[i].x);
    }
  }
  ReachGrid empty = synthetic_grid(g, 2, 2, 2);
  std::fill(empty.reach_left.begin(), empty.reach_left.end(), 0);
  for (const auto& c : score_balancer_columns(empty)) CHECK(c.count == 0);
}

TEST_CASE("manipulability field point: mean over feasible grasps") {
  const SceneConfig scene = default_scene();
  const GraspDatabase db = scene_grasps(scene);
  FieldContext ctx;
  ctx.robot = &scene.robot;
  ctx.arm = scene.workspace.cable_arm;
  ctx.object = &scene.slider;
  ctx.grasps = &db.at(scene.slider.name);
  ctx.object_rotation = scene.slider_rotation;
  ctx.obstacles = scene.obstacles();
  ctx.ik.restarts = 4;

  const FieldSample far = sample_field_point(ctx, Vector3d(5000, 0, 0), 1);
  CHECK(far.G == 0);
  CHECK(far.M == 0.0);

  const FieldSample s = sample_field_point(ctx, scene.workspace.reference, 9);
  REQUIRE(s.G > 0);
  CHECK(s.G == static_cast<int>(s.per_grasp.size()));
  const auto [lo, hi] = std::minmax_element(s.per_grasp.begin(), s.per_grasp.end());
  CHECK(s.M >= *lo);
  CHECK(s.M <= *hi);

  // Recomputed from the IK solutions directly.
  const ArmModel& arm = scene.robot.arm(ctx.arm);
  Posed object_pose{ctx.object_rotation, scene.workspace.reference};
  double sum = 0.0;
  int feasible = 0;
  for (std::size_t g = 0; g < ctx.grasps->size(); ++g) {
    IkOptions ik;
    ik.restarts = ctx.ik.restarts;
    ik.seed = mix_seed(9, g);
    double best = -1.0;
    for (const JointVector& q : solve_ik(arm, grasp_world_pose((*ctx.grasps)[g], object_pose), ik)) {
      DualJoints dual = scene.robot.home;
      dual[index_of(ctx.arm)] = q;
      const std::vector<SceneObject> held{{ctx.object, object_pose, {ctx.arm}}};
      if (robot_collision_free(scene.robot, dual, held, ctx.obstacles).free) best = std::max(best, manipulability(arm, q));
    }
    if (best >= 0.0) {
      sum += best;
      ++feasible;
    }
  }
  CHECK(feasible == s.G);
  CHECK(std::abs(sum / feasible - s.M) <= 1e-9);

  // One grasp only: M is that grasp's value.
  const std::vector<GraspCandidate> one{(*ctx.grasps)[0]};
  FieldContext single = ctx;
  single.grasps = &one;
  const FieldSample s1 = sample_field_point(single, scene.workspace.reference, 9);
  if (s1.G == 1) CHECK(s1.M == s1.per_grasp[0]);
}

TEST_CASE("manipulability sphere") {
  test::Gen g(72);
  for (int trial = 0; trial < 30; ++trial) {
    ReachGrid grid = synthetic_grid(g, 5, 5, 5);
    // Smooth field falling off from the centre, with noise.
    const Vector3d centre = grid.point(grid.index(2, 2, 2));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = (grid.point(i) - centre).norm();
      grid.G[i] = std::max(0, 8 - static_cast<int>(d / 40.0) - g.integer(0, 1));
      grid.M[i] = grid.G[i] ? 0.02 - d * 1e-4 + g.uniform(-1e-3, 1e-3) : 0.0;
    }
    FieldSample ref;
    ref.position = centre;
    ref.M = grid.M[grid.index(2, 2, 2)];
    ref.G = grid.G[grid.index(2, 2, 2)];
    if (ref.G == 0) continue;
    double prev = std::numeric_limits<double>::infinity();
    for (double mf : {0.5, 0.7, 0.8, 0.9, 1.0}) {
      const SphereReport r = manipulability_sphere(grid, ref, mf, 0.5);
      CHECK(r.radius >= 0.0);
      CHECK(r.radius <= prev);
      prev = r.radius;
      CHECK(r.min_M >= mf * ref.M);
      CHECK(r.min_G >= 0.5 * ref.G);
      CHECK(r.radius == doctest::Approx(brute_radius(grid, ref, mf, 0.5)));
    }
    CHECK(manipulability_sphere(grid, ref, 0.8, 0.9).radius <= manipulability_sphere(grid, ref, 0.8, 0.5).radius);
  }
  FieldSample none;
  ReachGrid grid = synthetic_grid(g, 2, 2, 2);
  CHECK_THROWS_AS(manipulability_sphere(grid, none, 0.8, 0.5), std::invalid_argument);
}

TEST_CASE("grid csv has the documented columns") {
  test::Gen g(73);
  const ReachGrid grid = synthetic_grid(g, 2, 3, 2);
  std::ostringstream out;
  write_grid_csv(grid, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,z,reach_r,reach_l,omega,M,G");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 8);
    CHECK(std::stoi(cells[5]) == (std::stoi(cells[3]) & std::stoi(cells[4])));
  }
  CHECK(rows == grid.size());
}
