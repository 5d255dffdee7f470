#include "tether/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace tether {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::array<int, 3> ReachGrid::cell(std::size_t index) const {
  const int i = static_cast<int>(index % static_cast<std::size_t>(dims[0]));
  const std::size_t rest = index / static_cast<std::size_t>(dims[0]);
  const int j = static_cast<int>(rest % static_cast<std::size_t>(dims[1]));
  const int k = static_cast<int>(rest / static_cast<std::size_t>(dims[1]));
  return {i, j, k};
}

Vector3d ReachGrid::point(std::size_t index) const {
  const auto c = cell(index);
  return origin + spacing * Vector3d(c[0], c[1], c[2]);
}

std::array<Matrix3d, 6> canonical_orientations() {
  std::array<Matrix3d, 6> out;
  for (int a = 0; a < 3; ++a) {
    for (int s = 0; s < 2; ++s) {
      const Vector3d approach = (s == 0 ? 1.0 : -1.0) * Vector3d::Unit(a);
      const Vector3d side = Vector3d::Unit((a + 1) % 3);
      Matrix3d r;
      r.col(0) = approach;
      r.col(1) = side;
      r.col(2) = approach.cross(side);
      out[static_cast<std::size_t>(2 * a + s)] = r;
    }
  }
  return out;
}

bool point_reachable(const ArmModel& arm, const Vector3d& p, const ReachOptions& options, std::uint64_t point_seed) {
  IkOptions ik;
  ik.restarts = options.restarts;
  ik.tolerance = options.tolerance;
  ik.max_solutions = 1;
  const auto orientations = canonical_orientations();
  for (std::size_t o = 0; o < orientations.size(); ++o) {
    Posed target = Posed::from_translation(p.x(), p.y(), p.z());
    target.rotation = orientations[o];
    ik.seed = mix_seed(point_seed, o);
    if (!solve_ik(arm, target, ik).empty()) return true;
  }
  return false;
}

namespace {

int count_points(double lower, double upper, double spacing) {
  return static_cast<int>(std::floor((upper - lower) / spacing + 1e-9)) + 1;
}

}  // namespace

ReachGrid build_reach_grid(const Robot& robot, const GridBounds& bounds, const ReachOptions& options) {
  if (bounds.spacing <= 0.0) throw std::invalid_argument("grid spacing must be positive");
  if ((bounds.upper.array() < bounds.lower.array()).any()) throw std::invalid_argument("grid bounds are inverted");
  ReachGrid grid;
  grid.origin = bounds.lower;
  grid.spacing = bounds.spacing;
  for (int a = 0; a < 3; ++a) grid.dims[static_cast<std::size_t>(a)] = count_points(bounds.lower[a], bounds.upper[a], bounds.spacing);
  const std::size_t n = grid.size();
  grid.reach_right.assign(n, 0);
  grid.reach_left.assign(n, 0);
  grid.M.assign(n, 0.0);
  grid.G.assign(n, 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Vector3d p = grid.point(idx);
    grid.reach_right[idx] = point_reachable(robot.arm(ArmSide::right), p, options, mix_seed(options.seed, 2 * idx));
    grid.reach_left[idx] = point_reachable(robot.arm(ArmSide::left), p, options, mix_seed(options.seed, 2 * idx + 1));
  }
  return grid;
}

std::vector<ColumnScore> score_balancer_columns(const ReachGrid& grid) {
  std::vector<ColumnScore> out;
  for (int j = 0; j < grid.dims[1]; ++j) {
    for (int i = 0; i < grid.dims[0]; ++i) {
      ColumnScore c;
      const Vector3d p = grid.point(grid.index(i, j, 0));
      c.x = p.x();
      c.y = p.y();
      for (int k = 0; k < grid.dims[2]; ++k) c.count += grid.omega(grid.index(i, j, k)) ? 1 : 0;
      out.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ColumnScore& a, const ColumnScore& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.x != b.x) return a.x > b.x;
    if (std::abs(a.y) != std::abs(b.y)) return std::abs(a.y) < std::abs(b.y);
    return a.y < b.y;
  });
  return out;
}

FieldSample sample_field_point(const FieldContext& ctx, const Vector3d& p, std::uint64_t point_seed) {
  FieldSample s;
  s.position = p;
  const ArmModel& arm = ctx.robot->arm(ctx.arm);
  Posed object_pose = Posed::from_translation(p.x(), p.y(), p.z());
  object_pose.rotation = ctx.object_rotation;
  if ((p - arm.base.translation).norm() > reach_bound(arm)) return s;

  IkOptions ik;
  ik.restarts = ctx.ik.restarts;
  ik.tolerance = ctx.ik.tolerance;
  const std::vector<SceneObject> objects{{ctx.object, object_pose, {ctx.arm}}};
  double sum = 0.0;
  for (std::size_t g = 0; g < ctx.grasps->size(); ++g) {
    ik.seed = mix_seed(point_seed, g);
    double best = -1.0;
    for (const JointVector& q : solve_ik(arm, grasp_world_pose((*ctx.grasps)[g], object_pose), ik)) {
      DualJoints dual = ctx.robot->home;
      dual[index_of(ctx.arm)] = q;
      if (!robot_collision_free(*ctx.robot, dual, objects, ctx.obstacles).free) continue;
      best = std::max(best, manipulability(arm, q));
    }
    if (best < 0.0) continue;
    s.per_grasp.push_back(best);
    sum += best;
  }
  s.G = static_cast<int>(s.per_grasp.size());
  s.M = s.G > 0 ? sum / s.G : 0.0;
  return s;
}

void manipulability_field(ReachGrid& grid, const FieldContext& ctx) {
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const FieldSample s = sample_field_point(ctx, grid.point(idx), mix_seed(ctx.ik.seed, idx));
    grid.M[idx] = s.M;
    grid.G[idx] = s.G;
  }
}

SphereReport manipulability_sphere(const ReachGrid& field, const FieldSample& reference, double m_fraction,
                                   double g_fraction) {
  if (reference.G <= 0) throw std::invalid_argument("reference point has no feasible grasps");
  SphereReport r;
  r.reference = reference.position;
  r.reference_M = reference.M;
  r.reference_G = reference.G;
  r.min_M = reference.M;
  r.min_G = reference.G;
  const double m_min = m_fraction * reference.M;
  const double g_min = g_fraction * reference.G;

  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(field.size());
  for (std::size_t idx = 0; idx < field.size(); ++idx)
    by_distance.emplace_back((field.point(idx) - reference.position).norm(), idx);
  std::sort(by_distance.begin(), by_distance.end());

  // Grow shell by shell; a shell is admitted only if all of its points pass.
  std::size_t i = 0;
  while (i < by_distance.size()) {
    const double d = by_distance[i].first;
    std::size_t end = i;
    bool ok = true;
    double shell_m = r.min_M;
    int shell_g = r.min_G;
    while (end < by_distance.size() && by_distance[end].first <= d + 1e-9) {
      const std::size_t idx = by_distance[end].second;
      if (field.M[idx] < m_min || field.G[idx] < g_min) ok = false;
      shell_m = std::min(shell_m, field.M[idx]);
      shell_g = std::min(shell_g, field.G[idx]);
      ++end;
    }
    if (!ok) break;
    r.radius = d;
    r.min_M = shell_m;
    r.min_G = shell_g;
    r.points = end;
    i = end;
  }
  return r;
}

void write_grid_csv(const ReachGrid& grid, std::ostream& out) {
  out << "x,y,z,reach_r,reach_l,omega,M,G\n";
  char buf[160];
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Vector3d p = grid.point(idx);
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%d,%d,%d,%.17g,%d\n", p.x(), p.y(), p.z(), grid.reach_right[idx],
                  grid.reach_left[idx], grid.omega(idx) ? 1 : 0, grid.M[idx], grid.G[idx]);
    out << buf;
  }
}

}  // namespace tether
