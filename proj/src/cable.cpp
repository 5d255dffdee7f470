#include "tether/cable.hpp"

#include <stdexcept>

namespace tether {

std::vector<Vector3d> CableState::waypoints() const {
  std::vector<Vector3d> out{tool_tail};
  if (slider) out.push_back(*slider);
  out.push_back(anchor);
  return out;
}

BendingAngle bending_angle(const CableState& state) {
  const Vector3d first = state.slider ? *state.slider : state.anchor;
  const Vector3d dir_world = first - state.tool_tail;
  BendingAngle out;
  if (dir_world.norm() <= 0.0) {
    out.indeterminate = true;
    return out;
  }
  const Vector3d c = state.tool_frame.rotation.transpose() * dir_world.normalized();
  const Vector3d n = state.tail_frame.plane_normal.normalized();
  const Vector3d r = (state.tail_frame.reference - state.tail_frame.reference.dot(n) * n).normalized();
  const Vector3d u = n.cross(r);  // reference rotated +90 degrees
  const Vector3d projected = c - c.dot(n) * n;
  const double x = projected.dot(r);
  const double y = projected.dot(u);
  double phi = rad2deg(std::atan2(y, x));
  if (phi < 0.0) phi += 360.0;
  if (phi >= 360.0) phi -= 360.0;
  out.degrees = phi <= 180.0 ? phi : 360.0 - phi;
  out.quadrant = std::min(4, static_cast<int>(phi / 90.0) + 1);
  out.indeterminate = projected.norm() < std::sin(deg2rad(1.0));
  return out;
}

std::vector<Segmentd> cable_segments(const CableState& state) {
  const std::vector<Vector3d> pts = state.waypoints();
  std::vector<Segmentd> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back({pts[i], pts[i + 1]});
  return out;
}

void validate_cable(const CableState& state) {
  for (const Segmentd& s : cable_segments(state)) {
    if (!(s.length() > 1.0)) throw std::invalid_argument("cable segment shorter than 1 mm");
  }
}

namespace {

bool ee_side(int quadrant) { return quadrant <= 2; }

}  // namespace

double signed_sweep(double prev_angle, int prev_quadrant, double angle, int quadrant) {
  if (ee_side(prev_quadrant) == ee_side(quadrant)) {
    const double eta = ee_side(quadrant) ? 1.0 : -1.0;
    return eta * (angle - prev_angle);
  }
  // Crossing the reference line: either through 180 degrees or through 0.
  const bool through_back = prev_angle + angle > 180.0;
  if (through_back) {
    const double sweep = (180.0 - prev_angle) + (180.0 - angle);
    return ee_side(prev_quadrant) ? sweep : -sweep;
  }
  const double sweep = prev_angle + angle;
  return ee_side(prev_quadrant) ? -sweep : sweep;
}

AccumulationTracker update_accumulation(AccumulationTracker t, const BendingAngle& bend) {
  if (bend.indeterminate) {
    t.prev_angle = bend.degrees;
    return t;
  }
  const double delta = signed_sweep(t.prev_angle, t.prev_quadrant, bend.degrees, bend.quadrant);

  if (t.engaged_ee) {
    t.acc_ee += delta;
    if (t.acc_ee <= 0.0) {
      t.acc_ee = 0.0;
      t.engaged_ee = false;
    }
  } else if (ee_side(bend.quadrant) && t.prev_angle < t.beta && bend.degrees >= t.beta) {
    t.engaged_ee = true;
    t.acc_ee = bend.degrees - t.beta;
  } else {
    t.acc_ee = 0.0;
  }

  if (t.engaged_tool) {
    t.acc_tool -= delta;
    if (t.acc_tool <= 0.0) {
      t.acc_tool = 0.0;
      t.engaged_tool = false;
    }
  } else if (!ee_side(bend.quadrant) && t.prev_angle < t.tool_threshold && bend.degrees >= t.tool_threshold) {
    t.engaged_tool = true;
    t.acc_tool = bend.degrees - t.tool_threshold;
  } else {
    t.acc_tool = 0.0;
  }

  t.prev_angle = bend.degrees;
  t.prev_quadrant = bend.quadrant;
  return t;
}

AccumulationTracker update_accumulation(const AccumulationTracker& tracker, const CableState& state) {
  return update_accumulation(tracker, bending_angle(state));
}

}  // namespace tether
