#pragma once

// Slider placement that keeps the tool cable near its unbent direction while
// the tool arm executes an OMMS.

#include "tether/omms.hpp"

namespace tether {

enum class GoalStatus { candidate, kept, unreachable, cable_collision, accumulation };

const char* to_string(GoalStatus status);

struct SliderGoal {
  Vector3d position = Vector3d::Zero();
  std::size_t source_step = 0;
  double alpha_s = 0.0;
  GoalStatus status = GoalStatus::candidate;

  bool discarded() const { return status != GoalStatus::candidate && status != GoalStatus::kept; }
};

/// alpha_s along the tool's tail direction from the tool origin, lifted to at
/// least `min_height`.
Vector3d project_slider_goal(const Posed& tool_pose, double alpha_s, double min_height,
                             const Vector3d& tail_direction_local = -Vector3d::UnitX());

/// One goal per OMMS state.
std::vector<SliderGoal> slider_goals(const MotionSequence& omms, double alpha_s, double min_height,
                                     const Vector3d& tail_direction_local);

/// Where the slider hangs on the cable before it is grasped: on the straight
/// cable of `tool_pose`, (alpha_s - |tail|) from the tail.
Vector3d slider_rest_position(const SceneConfig& scene, const Posed& tool_pose, double alpha_s);

struct CmmsDiagnostics {
  double alpha_s = 0.0;
  std::vector<SliderGoal> goals;
  std::string failure;   // empty on success
};

/// Marks each goal kept or discarded (unreachable, cable collision,
/// accumulation above the threshold) by simulating the cable arm across the
/// sequence. Goals before the tool is grasped are left as candidates.
std::vector<SliderGoal> filter_candidates(const PlanContext& ctx, const MotionSequence& omms, double alpha_s,
                                          double acc_threshold);

/// Adds the cable arm to an OMMS: it grasps the slider once the tool is in
/// hand and then follows one slider goal per OMMS state. On failure alpha_s
/// is reduced once; if that fails too PlanningError(replan_omms) is thrown.
MotionSequence plan_cmms(const PlanContext& ctx, const MotionSequence& omms, double alpha_s, double acc_threshold,
                         std::uint64_t seed, std::vector<CmmsDiagnostics>* diagnostics = nullptr);

}  // namespace tether
