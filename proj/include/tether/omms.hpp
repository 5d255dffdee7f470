#pragma once

// Single-arm pick-and-place of the tool through a list of goal poses, the
// cable replay shared by every planner mode, and the handover baseline.

#include "tether/motion.hpp"
#include "tether/scene.hpp"

namespace tether {

struct PlanContext {
  const SceneConfig* scene = nullptr;
  const GraspDatabase* grasps = nullptr;
  SceneObstacles obstacles;         // table, margin and any extra boxes
  SceneObstacles cable_obstacles;   // what the cable is checked against

  void add_box(const OrientedBoxd& box);

  PlanContext(const SceneConfig& scene, const GraspDatabase& grasps);

  const std::vector<GraspCandidate>& tool_grasps() const { return grasps->at(scene->tool.shape.name); }
  const std::vector<GraspCandidate>& slider_grasps() const { return grasps->at(scene->slider.name); }
};

/// Pose of an object held with `grasp` by an arm at `q`.
Posed held_object_pose(const ArmModel& arm, const JointVector& q, const GraspCandidate& grasp);

/// Cable from the tool tail (through the slider point, if any) to the anchor.
CableState tool_cable(const SceneConfig& scene, const Posed& tool_pose, const std::optional<Vector3d>& slider);

/// Scene objects of a state: the tool (touched by the tool arm once it is
/// grasped or being approached) and the slider while it is held.
std::vector<SceneObject> state_objects(const SceneConfig& scene, const PlanState& state);

/// Robot collision check of one state against the context's obstacles.
CollisionReport state_collision(const PlanContext& ctx, const PlanState& state);

/// Cable clearance of one state. The tool arm's end-effector is exempt, and
/// so is the cable arm's while it holds the slider the cable runs through.
CableClearance state_cable_clearance(const PlanContext& ctx, const PlanState& state);

/// Rebuilds the cable of every state, threads the accumulation tracker
/// through the sequence and records cable clearance.
void replay_cable(const PlanContext& ctx, MotionSequence& sequence);

/// Picks the tool at `start` and carries it through `goals` in order with one
/// grasp. The other arm stays at home. Throws PlanningError (no_grasp,
/// no_path).
MotionSequence plan_omms(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals, std::uint64_t seed,
                         std::optional<ArmSide> tool_arm = std::nullopt);

/// Baseline with one fixed-pose exchange: the first arm carries the tool to
/// the scene's handover pose, the second arm grasps it there, the first arm
/// returns home and the second arm visits the goals.
MotionSequence plan_handover(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals,
                             std::uint64_t seed);

}  // namespace tether
