#pragma once

// Serial revolute arms: forward kinematics, geometric Jacobian,
// joint-limit-penalised manipulability and a damped least-squares IK solver.

#include "tether/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tether {

using JointVector = Eigen::VectorXd;  // degrees
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct Joint {
  Vector3d axis = Vector3d::UnitZ();        // unit, in the joint's own frame
  Vector3d offset = Vector3d::Zero();       // from the parent frame, mm
  double min_deg = -170.0;
  double max_deg = 170.0;
};

/// Capsule of the link that starts at joint `index` (local to that joint frame).
struct LinkCapsule {
  Segmentd local;
  double radius = 0.0;
};

struct ArmModel {
  std::string name;
  Posed base;                           // arm mount in the robot frame
  std::vector<Joint> joints;
  Vector3d flange = Vector3d::Zero();   // end-effector point from the last joint frame
  std::vector<LinkCapsule> links;       // one per joint; the last ends at the end-effector

  std::size_t dof() const { return joints.size(); }
  JointVector lower() const;
  JointVector upper() const;
  JointVector midpoint() const;

  /// Throws std::invalid_argument when limits or sizes are inconsistent.
  void validate() const;
};

/// Builds link capsules running from each joint origin to the next joint
/// (the last one to the flange point).
std::vector<LinkCapsule> chain_link_capsules(const std::vector<Joint>& joints, const Vector3d& flange,
                                             const std::vector<double>& radii);

struct ForwardResult {
  Posed end_effector;
  std::vector<Posed> joint_frames;   // world frame of each joint after its rotation
  std::vector<Capsuled> links;       // world capsules
};

ForwardResult forward_kinematics(const ArmModel& arm, const JointVector& q);
Posed end_effector_pose(const ArmModel& arm, const JointVector& q);

/// Geometric Jacobian in the robot frame; linear rows in mm/rad, angular rows unitless.
Jacobian jacobian(const ArmModel& arm, const JointVector& q);

/// Product over joints of 4(q-min)(max-q)/(max-min)^2.
double joint_limit_penalty(const ArmModel& arm, const JointVector& q);

/// sqrt(det(J J^T)) with the linear rows expressed in metres, times the
/// joint-limit penalty. Zero at any joint limit.
double manipulability(const ArmModel& arm, const JointVector& q);

bool within_limits(const ArmModel& arm, const JointVector& q, double slack_deg = 0.0);

struct IkTolerance {
  double mm = 1.0;
  double deg = 0.5;
};

struct IkOptions {
  int restarts = 20;
  IkTolerance tolerance;
  std::uint64_t seed = 0;
  int max_iterations = 300;
  double initial_damping = 0.1;
  double rotation_weight_mm = 100.0;   // mm per radian of orientation error
  std::size_t max_solutions = 0;       // 0: keep every distinct solution
  double duplicate_deg = 2.0;
};

struct PoseError {
  double position_mm = 0.0;
  double rotation_deg = 0.0;
};

PoseError pose_error(const Posed& a, const Posed& b);

/// Random-restart damped least squares. Every returned vector satisfies the
/// joint limits and reaches `target` within tolerance; near-duplicates are
/// dropped. Empty when nothing converged.
std::vector<JointVector> solve_ik(const ArmModel& arm, const Posed& target, const IkOptions& options = {});

/// Single damped least-squares descent from `start`.
std::optional<JointVector> solve_ik_from(const ArmModel& arm, const Posed& target, const JointVector& start,
                                         const IkOptions& options = {});

/// Largest distance the end-effector can be from the first joint origin.
double reach_bound(const ArmModel& arm);

double max_joint_delta(const JointVector& a, const JointVector& b);

}  // namespace tether
