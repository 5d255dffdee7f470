#pragma once

// Clearance queries between robot links, held or resting objects, the cable
// and box obstacles. Everything is a capsule or an oriented box.

#include "tether/cable.hpp"
#include "tether/grasp.hpp"
#include "tether/robot.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tether {

struct SceneObstacles {
  std::vector<OrientedBoxd> boxes;
  std::optional<OrientedBoxd> table;
  double margin = 5.0;
};

/// An object in the scene. `contact_arms` names the arms whose end-effector
/// link touches it (holding it, or closing in on it); those links are not
/// checked against the object.
struct SceneObject {
  const ObjectShape* shape = nullptr;
  Posed pose;
  std::vector<ArmSide> contact_arms;

  bool touches(std::size_t arm) const {
    for (ArmSide side : contact_arms)
      if (index_of(side) == arm) return true;
    return false;
  }
};

/// World capsules of both arms and the torso for one configuration.
struct RobotGeometry {
  std::array<std::vector<Capsuled>, 2> links;
  std::vector<Capsuled> torso;
};

RobotGeometry robot_geometry(const Robot& robot, const DualJoints& q);

struct CollisionReport {
  bool free = true;
  std::string violation;            // first offending pair, empty when free
  double min_clearance = std::numeric_limits<double>::infinity();
};

/// True iff every checked pair clears by more than the margin: inter-arm and
/// non-adjacent self links, links against torso and boxes, objects against
/// links, boxes and each other. Objects may rest on the table top (contact up
/// to 1 mm of penetration is accepted there).
CollisionReport robot_collision_free(const Robot& robot, const DualJoints& q, const std::vector<SceneObject>& objects,
                                     const SceneObstacles& obstacles);
CollisionReport robot_collision_free(const RobotGeometry& geometry, const std::vector<SceneObject>& objects,
                                     const SceneObstacles& obstacles);

struct LinkRef {
  ArmSide arm = ArmSide::right;
  std::size_t link = 0;
  bool operator==(const LinkRef&) const = default;
};

/// Last link of the arm (the end-effector).
LinkRef end_effector_link(const Robot& robot, ArmSide side);

struct CableClearance {
  bool clear = true;
  double min_clearance = std::numeric_limits<double>::infinity();
  std::string closest;   // what the minimum clearance was measured against
};

/// Cable segments against every link (except `exempt`), the torso, the boxes
/// and the table. Clear iff the minimum clearance exceeds the margin.
CableClearance cable_clear(const CableState& cable, const RobotGeometry& geometry, const SceneObstacles& obstacles,
                           const std::vector<LinkRef>& exempt);
CableClearance cable_clear(const CableState& cable, const Robot& robot, const DualJoints& q,
                           const SceneObstacles& obstacles, const std::vector<LinkRef>& exempt);

}  // namespace tether
