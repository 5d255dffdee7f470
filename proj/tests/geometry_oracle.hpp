#pragma once

// Brute-force distance oracles and random primitives for the geometry checks.

#include "support.hpp"

namespace test {

using tether::OrientedBoxd;
using tether::Segmentd;

// Distance between segments by refining a grid over both parameters.
inline double oracle_segments(const Segmentd& s1, const Segmentd& s2) {
  return grid_minimum([&](double u, double v) { return (s1.at(u) - s2.at(v)).norm(); });
}

// Signed distance to a box: the nearest surface sample over all six faces,
// negative when the point is inside.
inline double oracle_point_box(const Vector3d& p, const OrientedBoxd& box) {
  const Vector3d local = box.pose.rotation.transpose() * (p - box.pose.translation);
  const Vector3d& h = box.half_extents;
  double best = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    for (double side : {-1.0, 1.0}) {
      best = std::min(best, grid_minimum([&](double u, double v) {
        Vector3d s;
        s[axis] = side * h[axis];
        s[a] = (2.0 * u - 1.0) * h[a];
        s[b] = (2.0 * v - 1.0) * h[b];
        return (s - local).norm();
      }, 20, 6));
    }
  }
  const bool inside = (local.cwiseAbs() - h).maxCoeff() < 0.0;
  return inside ? -best : best;
}

inline Segmentd random_segment(Gen& g, double lo, double hi) {
  Segmentd s;
  s.a = Vector3d(g.uniform(lo, hi), g.uniform(lo, hi), g.uniform(lo, hi));
  s.b = g.integer(0, 19) == 0 ? s.a : Vector3d(g.uniform(lo, hi), g.uniform(lo, hi), g.uniform(lo, hi));
  return s;
}

inline OrientedBoxd random_box(Gen& g) {
  OrientedBoxd box;
  box.pose = g.pose(30.0);
  box.half_extents = Vector3d(g.uniform(5, 60), g.uniform(5, 60), g.uniform(5, 60));
  return box;
}


/// Minimum of the point-box signed distance along a segment, sampled densely.
inline double oracle_segment_box(const Segmentd& s, const OrientedBoxd& box, int n = 20000) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) best = std::min(best, tether::point_box_signed_distance(s.at(double(k) / n), box));
  return best;
}

}  // namespace test
