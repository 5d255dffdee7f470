#pragma once

// Straight-line cable geometry and the angle-accumulation metric.
//
// The bending angle is measured in a plane fixed to the tool: the cable
// direction leaving the tail is projected onto that plane and compared with
// the reference (unbent) tail direction. Quadrants are numbered
// counter-clockwise from the reference direction, starting at 1.

#include "tether/geometry.hpp"

#include <optional>
#include <vector>

namespace tether {

/// Tool-local definition of the measurement plane.
struct TailFrame {
  Vector3d reference = -Vector3d::UnitX();   // cable direction when unbent
  Vector3d plane_normal = Vector3d::UnitZ();
};

struct CableState {
  Vector3d tool_tail = Vector3d::Zero();
  Vector3d anchor = Vector3d::Zero();
  std::optional<Vector3d> slider;
  Posed tool_frame;
  TailFrame tail_frame;

  /// Tail, optional slider, anchor.
  std::vector<Vector3d> waypoints() const;
};

struct BendingAngle {
  double degrees = 0.0;    // [0, 180]
  int quadrant = 1;        // 1..4
  bool indeterminate = false;
};

/// Planar bending of the first cable segment relative to the tail reference.
BendingAngle bending_angle(const CableState& state);

std::vector<Segmentd> cable_segments(const CableState& state);

/// Throws std::invalid_argument if a segment is not longer than 1 mm.
void validate_cable(const CableState& state);

/// Recursive accumulation state for one trajectory.
struct AccumulationTracker {
  double beta = 60.0;              // grasp angle, degrees
  double tool_threshold = 90.0;
  double acc_ee = 0.0;
  double acc_tool = 0.0;
  double prev_angle = 0.0;         // starts at the unbent reference
  int prev_quadrant = 1;
  bool engaged_ee = false;
  bool engaged_tool = false;
};

/// Signed counter-clockwise change between two consecutive bending samples.
/// Within one side of the reference line (quadrants 1-2 or 3-4) this is the
/// quadrant sign times the change of the bending angle; when the cable crosses
/// the 0 or 180 degree line the sign-corrected pieces on both sides are summed.
double signed_sweep(double prev_angle, int prev_quadrant, double angle, int quadrant);

/// One recursion step of the end-effector and tool accumulations.
AccumulationTracker update_accumulation(AccumulationTracker tracker, const BendingAngle& bend);
AccumulationTracker update_accumulation(const AccumulationTracker& tracker, const CableState& state);

}  // namespace tether
