#include "tether/collision.hpp"

#include <algorithm>

namespace tether {

RobotGeometry robot_geometry(const Robot& robot, const DualJoints& q) {
  RobotGeometry g;
  for (std::size_t i = 0; i < 2; ++i) g.links[i] = forward_kinematics(robot.arms[i], q[i]).links;
  g.torso = robot.torso;
  return g;
}

LinkRef end_effector_link(const Robot& robot, ArmSide side) { return {side, robot.arm(side).links.size() - 1}; }

namespace {

// Capsule against box with a bounding-sphere early out. The returned value is
// exact whenever it is at most `cutoff`.
double capsule_box(const Capsuled& c, const OrientedBoxd& box, double cutoff) {
  const Vector3d mid = 0.5 * (c.axis.a + c.axis.b);
  const double bound = point_box_signed_distance(mid, box) - 0.5 * c.axis.length() - c.radius;
  if (bound > cutoff) return bound;
  return capsule_box_distance(c, box);
}

double segment_box(const Segmentd& s, const OrientedBoxd& box, double cutoff) {
  const Vector3d mid = 0.5 * (s.a + s.b);
  const double bound = point_box_signed_distance(mid, box) - 0.5 * s.length();
  if (bound > cutoff) return bound;
  return segment_box_distance(s, box).first;
}

std::vector<Vector3d> sample_points(const ObjectShape& shape, const Posed& pose) {
  std::vector<Vector3d> pts;
  for (const Primitive& p : shape.parts) {
    if (p.kind == PrimitiveKind::box) {
      for (int i = 0; i < 8; ++i) {
        const Vector3d corner((i & 1 ? 1 : -1) * p.half_extents.x(), (i & 2 ? 1 : -1) * p.half_extents.y(),
                              (i & 4 ? 1 : -1) * p.half_extents.z());
        pts.push_back(pose.apply(p.pose.apply(corner)));
      }
    } else {
      for (int k = 0; k < 16; ++k) {
        const double a = deg2rad(22.5 * k);
        for (double s : {-1.0, 1.0}) {
          const Vector3d rim(p.radius * std::cos(a), p.radius * std::sin(a), s * p.half_length);
          pts.push_back(pose.apply(p.pose.apply(rim)));
        }
      }
    }
  }
  return pts;
}

struct Tracker {
  CollisionReport report;
  double margin;

  // Returns true when the pair violates the margin. Names are only built then.
  template <typename Names>
  bool add(double clearance, Names&& names) {
    if (clearance < report.min_clearance) report.min_clearance = clearance;
    if (clearance > margin) return false;
    if (report.free) {
      report.free = false;
      report.violation = names();
    }
    return true;
  }
};

std::string link_name(std::size_t arm, std::size_t link) {
  return std::string(to_string(static_cast<ArmSide>(arm))) + ".link" + std::to_string(link + 1);
}

}  // namespace

CollisionReport robot_collision_free(const Robot& robot, const DualJoints& q, const std::vector<SceneObject>& objects,
                                     const SceneObstacles& obstacles) {
  return robot_collision_free(robot_geometry(robot, q), objects, obstacles);
}

CollisionReport robot_collision_free(const RobotGeometry& g, const std::vector<SceneObject>& objects,
                                     const SceneObstacles& obstacles) {
  Tracker t{{}, obstacles.margin};
  const double cutoff = obstacles.margin + 1.0;

  // Arm against arm.
  for (std::size_t i = 0; i < g.links[0].size(); ++i) {
    for (std::size_t j = 0; j < g.links[1].size(); ++j) {
      if (t.add(capsule_capsule_distance(g.links[0][i], g.links[1][j]), [&] { return link_name(0, i) + " vs " + link_name(1, j); })) return t.report;
    }
  }
  for (std::size_t a = 0; a < 2; ++a) {
    const auto& links = g.links[a];
    // Self, skipping links that share a joint.
    for (std::size_t i = 0; i < links.size(); ++i) {
      for (std::size_t j = i + 2; j < links.size(); ++j) {
        if (t.add(capsule_capsule_distance(links[i], links[j]), [&] { return link_name(a, i) + " vs " + link_name(a, j); })) return t.report;
      }
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
      for (std::size_t k = 0; k < g.torso.size(); ++k) {
        // The first link is mounted on the torso.
        if (i == 0) continue;
        if (t.add(capsule_capsule_distance(links[i], g.torso[k]), [&] { return link_name(a, i) + " vs torso"; })) return t.report;
      }
      if (obstacles.table && t.add(capsule_box(links[i], *obstacles.table, cutoff), [&] { return link_name(a, i) + " vs table"; }))
        return t.report;
      for (std::size_t b = 0; b < obstacles.boxes.size(); ++b) {
        if (t.add(capsule_box(links[i], obstacles.boxes[b], cutoff), [&] { return link_name(a, i) + " vs box" + std::to_string(b); }))
          return t.report;
      }
    }
  }

  std::vector<std::vector<Capsuled>> object_caps;
  for (const SceneObject& o : objects) {
    std::vector<Capsuled> caps;
    for (const Capsuled& c : collision_capsules(*o.shape)) caps.push_back({transform(o.pose, c.axis), c.radius});
    object_caps.push_back(std::move(caps));
  }
  for (std::size_t oi = 0; oi < objects.size(); ++oi) {
    const SceneObject& o = objects[oi];
    const std::string& name = o.shape->name;
    for (const Capsuled& c : object_caps[oi]) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < g.links[a].size(); ++i) {
          if (o.touches(a) && i + 1 == g.links[a].size()) continue;
          if (t.add(capsule_capsule_distance(c, g.links[a][i]), [&] { return std::string(name) + " vs " + link_name(a, i); })) return t.report;
        }
      }
      for (const Capsuled& torso : g.torso) {
        if (t.add(capsule_capsule_distance(c, torso), [&] { return name + " vs torso"; })) return t.report;
      }
      for (std::size_t b = 0; b < obstacles.boxes.size(); ++b) {
        if (t.add(capsule_box(c, obstacles.boxes[b], cutoff), [&] { return std::string(name) + " vs box" + std::to_string(b); })) return t.report;
      }
      for (std::size_t oj = oi + 1; oj < objects.size(); ++oj) {
        for (const Capsuled& other_cap : object_caps[oj]) {
          if (t.add(capsule_capsule_distance(c, other_cap), [&] { return std::string(name) + " vs " + objects[oj].shape->name; })) return t.report;
        }
      }
    }
    if (obstacles.table) {
      double lowest = std::numeric_limits<double>::infinity();
      for (const Vector3d& p : sample_points(*o.shape, o.pose))
        lowest = std::min(lowest, point_box_signed_distance(p, *obstacles.table));
      // Resting contact is allowed; only penetration counts.
      if (lowest < -1.0) {
        t.report.free = false;
        t.report.violation = name + " vs table";
        t.report.min_clearance = std::min(t.report.min_clearance, lowest);
        return t.report;
      }
    }
  }
  return t.report;
}

CableClearance cable_clear(const CableState& cable, const RobotGeometry& g, const SceneObstacles& obstacles,
                           const std::vector<LinkRef>& exempt) {
  CableClearance out;
  auto add = [&](double d, std::string what) {
    if (d < out.min_clearance) {
      out.min_clearance = d;
      out.closest = std::move(what);
    }
  };
  const double cutoff = std::numeric_limits<double>::infinity();
  for (const Segmentd& s : cable_segments(cable)) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t i = 0; i < g.links[a].size(); ++i) {
        const LinkRef ref{static_cast<ArmSide>(a), i};
        if (std::find(exempt.begin(), exempt.end(), ref) != exempt.end()) continue;
        add(segment_capsule_distance(s, g.links[a][i]), link_name(a, i));
      }
    }
    for (const Capsuled& torso : g.torso) add(segment_capsule_distance(s, torso), "torso");
    for (std::size_t b = 0; b < obstacles.boxes.size(); ++b)
      add(segment_box(s, obstacles.boxes[b], cutoff), "box" + std::to_string(b));
    if (obstacles.table) add(segment_box(s, *obstacles.table, cutoff), "table");
  }
  out.clear = out.min_clearance > obstacles.margin;
  return out;
}

CableClearance cable_clear(const CableState& cable, const Robot& robot, const DualJoints& q,
                           const SceneObstacles& obstacles, const std::vector<LinkRef>& exempt) {
  return cable_clear(cable, robot_geometry(robot, q), obstacles, exempt);
}

}  // namespace tether
