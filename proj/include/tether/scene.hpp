#pragma once

// Scene configuration: robot, tool and slider, table, cable anchor, benchmark
// fixtures and every planner constant. Loaded from a JSON file whose fields
// all default to default_scene().

#include "tether/cable.hpp"
#include "tether/collision.hpp"
#include "tether/grasp.hpp"
#include "tether/robot.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tether {

struct ToolSpec {
  ObjectShape shape;
  Vector3d tail_local = Vector3d::Zero();   // cable connection point T, tool frame
  TailFrame tail_frame;
  double beta = 60.0;                       // grasp angle, degrees
};

enum class AnchorMode { balancer, table_corner };

struct AnchorConfig {
  AnchorMode mode = AnchorMode::balancer;
  Vector3d balancer{450.0, 0.0, 1800.0};
  Vector3d table_corner{250.0, 600.0, 700.0};

  const Vector3d& point() const { return mode == AnchorMode::balancer ? balancer : table_corner; }
};

struct PlannerParams {
  double step_deg = 5.0;
  double goal_bias = 0.1;
  int shortcut_iterations = 200;
  int max_iterations = 20000;        // tree extensions per RRT query
  double segment_timeout_s = 30.0;
  int ik_restarts = 20;
  int replan_attempts = 3;           // fresh OMMS seeds tried after a CMMS failure
};

struct CmmsParams {
  double acc_threshold = 30.0;   // degrees
  double alpha_s = 250.0;        // mm, slider distance along the tail normal
  double alpha_reduction = 0.8;
  double min_height = 950.0;     // mm, lowest slider goal
  double max_step_jump_deg = 20.0;
  ArmSide preferred_tool_arm = ArmSide::right;
};

struct WorkspaceParams {
  Vector3d lower{100.0, -600.0, 700.0};
  Vector3d upper{800.0, 600.0, 1900.0};
  double spacing = 50.0;
  Vector3d reference{500.0, 400.0, 900.0};
  double m_fraction = 0.8;
  double g_fraction = 0.5;
  ArmSide cable_arm = ArmSide::left;
  int ik_restarts = 4;
};

struct ObstacleTrialParams {
  int trials = 10;
  Posed start;
  std::vector<int> goals;             // 1-based indices into SceneConfig::goal_poses
  Vector3d box_min_half{40.0, 40.0, 60.0};
  Vector3d box_max_half{90.0, 90.0, 160.0};
  double footprint_clearance = 60.0;  // kept free around start and goal positions
};

struct SceneConfig {
  Robot robot;
  GripperSpec gripper;
  GraspSamplerParams tool_sampler;
  GraspSamplerParams slider_sampler;
  ToolSpec tool;
  ObjectShape slider;
  Matrix3d slider_rotation = Matrix3d::Identity();   // fixed slider orientation in the robot frame
  OrientedBoxd table{Posed::from_translation(600.0, 0.0, 675.0), Vector3d(350.0, 600.0, 25.0)};
  double margin = 5.0;
  AnchorConfig anchor;
  Posed benchmark_start;
  std::vector<Posed> goal_poses;                     // benchmark poses 1..7
  std::vector<std::array<int, 3>> benchmarks;        // 1-based goal indices
  Posed handover_pose;
  ObstacleTrialParams obstacle;
  PlannerParams planner;
  CmmsParams cmms;
  WorkspaceParams workspace;
  std::string grasp_database;                        // optional path; generated when empty
  std::uint64_t seed = 0;

  SceneObstacles obstacles() const;
  /// Goal poses of benchmark `id` (1-based). Throws std::out_of_range.
  std::vector<Posed> benchmark_goals(int id) const;
  /// Throws std::invalid_argument naming the first inconsistency.
  void validate() const;
};

SceneConfig default_scene();

/// Fields missing from the file keep their default_scene() value.
SceneConfig load_scene(const std::string& path);
SceneConfig parse_scene(const std::string& json_text);
std::string scene_to_json(const SceneConfig& scene);

/// R = Rz(yaw) Ry(pitch) Rx(roll), degrees.
Matrix3d rpy_deg(double roll, double pitch, double yaw);
Vector3d to_rpy_deg(const Matrix3d& r);

/// Grasp database for the scene's tool and slider: loaded from
/// `grasp_database` when set, generated otherwise.
GraspDatabase scene_grasps(const SceneConfig& scene);
GraspDatabase generate_scene_grasps(const SceneConfig& scene);

}  // namespace tether
