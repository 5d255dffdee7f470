#pragma once

// Plan states, joint-space interpolation and RRT-connect.

#include "tether/cable.hpp"
#include "tether/robot.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tether {

enum class Phase { approach, transfer, place, cable_follow };

const char* to_string(Phase phase);

/// One synchronized step of both arms, with the tool, slider and cable.
struct PlanState {
  std::size_t step = 0;
  Phase phase = Phase::approach;
  ArmSide tool_arm = ArmSide::right;
  DualJoints q;
  Posed tool_pose;
  bool tool_grasped = false;
  bool shared_tool = false;   // both hands on the tool during a handover
  std::optional<Posed> slider_pose;
  bool slider_grasped = false;
  bool slider_reach = false;   // the cable arm closing in on the slider
  bool time_scaled = false;    // inserted between two OMMS states so the cable arm keeps its step size
  CableState cable;
  double acc_ee = 0.0;
  double acc_tool = 0.0;
  double cable_clearance = 0.0;
  bool cable_collision = false;

  const JointVector& q_tool_arm() const { return q[index_of(tool_arm)]; }
  const JointVector& q_cable_arm() const { return q[index_of(other(tool_arm))]; }
  /// The cable arm's hand is on (or at) the slider.
  bool slider_contact() const { return slider_grasped || slider_reach; }
};

struct MotionSequence {
  std::vector<PlanState> states;
  ArmSide tool_arm = ArmSide::right;
  std::optional<std::size_t> tool_grasp;     // index into the tool's grasp list
  std::optional<std::size_t> slider_grasp;   // index into the slider's grasp list

  /// Renumbers steps from 0.
  void renumber();
};

/// Inserts evenly spaced configurations so consecutive entries differ by at
/// most `max_step_deg` on every joint. Endpoints are kept exactly.
std::vector<JointVector> interpolate(const std::vector<JointVector>& path, double max_step_deg);

enum class PlanErrorKind { no_grasp, no_path, no_slider_grasp, replan_omms };

class PlanningError : public std::runtime_error {
 public:
  PlanningError(PlanErrorKind kind, const std::string& detail);
  PlanErrorKind kind() const { return kind_; }

 private:
  PlanErrorKind kind_;
};

const char* to_string(PlanErrorKind kind);

struct RrtOptions {
  double step_deg = 5.0;
  double goal_bias = 0.1;
  int max_iterations = 20000;
  double timeout_s = 30.0;
  int shortcut_iterations = 200;
  std::uint64_t seed = 0;
};

using StateValidity = std::function<bool(const JointVector&)>;

/// True iff every configuration on the straight joint-space segment, sampled
/// at `step_deg`, is valid (the endpoints included).
bool segment_valid(const JointVector& a, const JointVector& b, const StateValidity& valid, double step_deg);

/// Bidirectional RRT in the arm's joint space between two valid
/// configurations, followed by random shortcutting. Returns the path densified
/// to `step_deg`, every state of which passed `valid`, or nothing when the
/// iteration or time budget runs out.
std::optional<std::vector<JointVector>> rrt_connect(const ArmModel& arm, const JointVector& start, const JointVector& goal,
                                                    const StateValidity& valid, const RrtOptions& options);

}  // namespace tether
