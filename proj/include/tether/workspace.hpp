#pragma once

// Reachability grids, the dual-arm region, balancer column scores, the
// grasp-based manipulability field and manipulability spheres.

#include "tether/collision.hpp"
#include "tether/grasp.hpp"
#include "tether/robot.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tether {

struct GridBounds {
  Vector3d lower;
  Vector3d upper;
  double spacing = 50.0;
};

struct ReachGrid {
  Vector3d origin = Vector3d::Zero();
  double spacing = 50.0;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> reach_right;
  std::vector<std::uint8_t> reach_left;
  std::vector<double> M;   // mean manipulability over feasible grasps, 0 when G == 0
  std::vector<int> G;      // feasible grasp count

  std::size_t size() const { return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
  }
  std::array<int, 3> cell(std::size_t index) const;
  Vector3d point(std::size_t index) const;
  bool reachable(ArmSide side, std::size_t index) const {
    return (side == ArmSide::right ? reach_right : reach_left)[index] != 0;
  }
  bool omega(std::size_t index) const { return reach_right[index] && reach_left[index]; }
};

struct ReachOptions {
  int restarts = 4;
  std::uint64_t seed = 0;
  IkTolerance tolerance;
};

/// The six axis-aligned end-effector orientations (approach along +-x, +-y,
/// +-z of the robot frame) tried by the reachability test.
std::array<Matrix3d, 6> canonical_orientations();

/// A point is reachable by an arm iff IK succeeds for any canonical
/// orientation. The grid covers [lower, upper] with points at `lower` plus
/// whole multiples of the spacing.
ReachGrid build_reach_grid(const Robot& robot, const GridBounds& bounds, const ReachOptions& options);

bool point_reachable(const ArmModel& arm, const Vector3d& p, const ReachOptions& options, std::uint64_t point_seed);

struct ColumnScore {
  double x = 0.0;
  double y = 0.0;
  int count = 0;   // dual-reachable z levels
};

/// Columns ranked by count, ties by larger x, then smaller |y|, then smaller y.
std::vector<ColumnScore> score_balancer_columns(const ReachGrid& grid);

struct FieldSample {
  Vector3d position = Vector3d::Zero();
  double M = 0.0;
  int G = 0;
  std::vector<double> per_grasp;   // best manipulability of each feasible grasp
};

struct FieldContext {
  const Robot* robot = nullptr;
  ArmSide arm = ArmSide::left;
  const ObjectShape* object = nullptr;
  const std::vector<GraspCandidate>* grasps = nullptr;
  Matrix3d object_rotation = Matrix3d::Identity();
  SceneObstacles obstacles;
  ReachOptions ik;
};

/// Places the object at `p` and scores every grasp by the most manipulable
/// IK solution that is collision free with the other arm at home.
FieldSample sample_field_point(const FieldContext& context, const Vector3d& p, std::uint64_t point_seed);

/// Fills M and G for every grid point.
void manipulability_field(ReachGrid& grid, const FieldContext& context);

struct SphereReport {
  Vector3d reference = Vector3d::Zero();
  double reference_M = 0.0;
  int reference_G = 0;
  double radius = 0.0;
  double min_M = 0.0;
  int min_G = 0;
  std::size_t points = 0;   // grid points inside the radius
};

/// Largest radius (a distance from the reference to some grid point) such
/// that every grid point within it keeps M >= m_fraction * M_ref and
/// G >= g_fraction * G_ref. Throws std::invalid_argument when the reference
/// has no feasible grasps.
SphereReport manipulability_sphere(const ReachGrid& field, const FieldSample& reference, double m_fraction,
                                   double g_fraction);

/// CSV with header x,y,z,reach_r,reach_l,omega,M,G.
void write_grid_csv(const ReachGrid& grid, std::ostream& out);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace tether
