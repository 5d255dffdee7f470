#pragma once

// Cable trajectories generated as an unwrapped counter-clockwise angle, and a
// brute-force integrator that measures accumulation directly as rotation
// past the engagement point on that unwrapped angle.

#include "support.hpp"
#include "tether/cable.hpp"

namespace test {

struct CableTrajectory {
  std::vector<double> phi;                  // unwrapped ccw angle from the reference, degrees
  std::vector<tether::CableState> states;
};

/// Cable direction at planar angle phi (ccw from the reference about the
/// plane normal) with an out-of-plane tilt, placed in a random tool frame.
inline tether::CableState cable_at(const tether::Posed& tool, double phi_deg, double tilt, double length) {
  const tether::TailFrame frame;
  const Vector3d r = frame.reference;
  const Vector3d n = frame.plane_normal;
  const Vector3d u = n.cross(r);
  const double a = phi_deg * M_PI / 180.0;
  const Vector3d local = std::cos(a) * r + std::sin(a) * u + tilt * n;
  tether::CableState s;
  s.tool_frame = tool;
  s.tool_tail = tool.translation;
  s.anchor = tool.translation + tool.rotation * local.normalized() * length;
  return s;
}

/// Runs of monotone motion, each step below `max_step` degrees.
inline CableTrajectory random_trajectory(Gen& g, int steps, double max_step) {
  CableTrajectory t;
  const tether::Posed tool = g.pose(500.0);
  double phi = g.uniform(-40.0, 40.0);
  const double tilt = g.uniform(-0.5, 0.5);
  int dir = 1, run = 0;
  for (int k = 0; k < steps; ++k) {
    t.phi.push_back(phi);
    t.states.push_back(cable_at(tool, phi, tilt, g.uniform(200.0, 900.0)));
    if (run-- <= 0) {
      dir = g.uniform(0.0, 1.0) < 0.6 ? 1 : -1;
      run = g.integer(3, 60);
    }
    phi += dir * g.uniform(0.0, max_step);
  }
  return t;
}

struct OracleSample {
  double acc_ee = 0.0;
  double acc_tool = 0.0;
};

inline double wrapped(double phi) {
  double w = std::fmod(phi, 360.0);
  return w < 0.0 ? w + 360.0 : w;
}
inline bool on_ee_side(double phi) { return wrapped(phi) <= 180.0; }
inline double bend_of(double phi) {
  const double w = wrapped(phi);
  return w <= 180.0 ? w : 360.0 - w;
}

/// Engagement starts when the bend first reaches the threshold from below
/// on the matching side; from then on the accumulation is the rotation of
/// the unwrapped angle beyond the point where the threshold was crossed,
/// until it falls back to zero.
inline std::vector<OracleSample> integrate(const std::vector<double>& phi, double beta, double tool_threshold) {
  std::vector<OracleSample> out;
  bool ee = false, tool = false;
  double ee_base = 0.0, tool_base = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    OracleSample s;
    const double prev_bend = k == 0 ? bend_of(phi[0]) : bend_of(phi[k - 1]);
    const double bend = bend_of(phi[k]);
    if (ee) {
      s.acc_ee = phi[k] - ee_base;
      if (s.acc_ee <= 0.0) {
        s.acc_ee = 0.0;
        ee = false;
      }
    } else if (k > 0 && on_ee_side(phi[k]) && prev_bend < beta && bend >= beta) {
      ee = true;
      ee_base = phi[k] - (bend - beta);
      s.acc_ee = phi[k] - ee_base;
    }
    if (tool) {
      s.acc_tool = tool_base - phi[k];
      if (s.acc_tool <= 0.0) {
        s.acc_tool = 0.0;
        tool = false;
      }
    } else if (k > 0 && !on_ee_side(phi[k]) && prev_bend < tool_threshold && bend >= tool_threshold) {
      tool = true;
      tool_base = phi[k] + (bend - tool_threshold);
      s.acc_tool = tool_base - phi[k];
    }
    out.push_back(s);
  }
  return out;
}

/// Tracker primed with the first state of a trajectory.
inline tether::AccumulationTracker primed_tracker(const tether::CableState& first, double beta) {
  tether::AccumulationTracker t;
  t.beta = beta;
  const tether::BendingAngle b = tether::bending_angle(first);
  t.prev_angle = b.degrees;
  t.prev_quadrant = b.quadrant;
  return t;
}

}  // namespace test
