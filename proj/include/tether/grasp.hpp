#pragma once

#include "tether/geometry.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tether {

enum class PrimitiveKind { box, cylinder };

/// Box (half_extents) or cylinder (radius, half_length along local z) placed
/// in the object's local frame.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::box;
  Posed pose;
  Vector3d half_extents = Vector3d::Zero();
  double radius = 0.0;
  double half_length = 0.0;
  bool graspable = true;
  std::array<bool, 3> blocked_axes{false, false, false};  // box face pairs that must not be grasped
};

struct ObjectShape {
  std::string name;
  std::vector<Primitive> parts;
};

/// Conservative capsule around each primitive, in the object frame.
std::vector<Capsuled> collision_capsules(const ObjectShape& shape);

/// Signed distance from a point (object frame) to the shape surface.
double shape_signed_distance(const ObjectShape& shape, const Vector3d& point);

struct GraspCandidate {
  Posed hand_pose_local;   // end-effector frame in the object frame; x = approach, y = closing
  double gripper_width = 0.0;

  Vector3d approach_dir_local() const { return hand_pose_local.rotation.col(0); }
  Vector3d closing_dir_local() const { return hand_pose_local.rotation.col(1); }
};

struct GripperSpec {
  double min_width = 0.0;
  double max_width = 80.0;
  double finger_depth = 40.0;   // deepest the fingertip centre may sit below the entry face
};

struct GraspSamplerParams {
  GripperSpec gripper;
  int approach_count = 4;                  // around each closing axis
  std::vector<double> slide_offsets{0.0};  // along the free axis, mm
};

/// Antipodal side grasps on every graspable parallel face pair (boxes) or
/// around the axis (cylinders) whose width fits the gripper.
std::vector<GraspCandidate> generate_grasps(const ObjectShape& object, const GraspSamplerParams& params);

inline Posed grasp_world_pose(const GraspCandidate& grasp, const Posed& object_pose) {
  return compose(object_pose, grasp.hand_pose_local);
}

/// Pad contact points (object frame) for a grasp executed at its width.
std::array<Vector3d, 2> pad_points(const GraspCandidate& grasp);

/// Grasp lists keyed by object name. Text format, one record per line:
///   <object> r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz width
/// Blank lines and lines starting with '#' are ignored.
class GraspDatabase {
 public:
  void set(const std::string& object, std::vector<GraspCandidate> grasps);
  bool contains(const std::string& object) const;
  /// Throws std::out_of_range for unknown objects.
  const std::vector<GraspCandidate>& at(const std::string& object) const;
  std::vector<std::string> objects() const;

  void write(std::ostream& out) const;
  static GraspDatabase read(std::istream& in);
  void save(const std::string& path) const;
  static GraspDatabase load(const std::string& path);

 private:
  std::map<std::string, std::vector<GraspCandidate>> grasps_;
};

}  // namespace tether
