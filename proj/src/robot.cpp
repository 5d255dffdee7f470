#include "tether/robot.hpp"

namespace tether {

const char* to_string(ArmSide side) { return side == ArmSide::right ? "right" : "left"; }

ArmModel default_arm(const std::string& name, const Posed& base) {
  ArmModel arm;
  arm.name = name;
  arm.base = base;
  const Vector3d x = Vector3d::UnitX();
  const Vector3d y = Vector3d::UnitY();
  const Vector3d z = Vector3d::UnitZ();
  arm.joints = {
      {z, Vector3d::Zero(), -170.0, 170.0},   // shoulder yaw
      {y, 300.0 * z, -170.0, 170.0},          // shoulder pitch
      {y, 250.0 * x, 0.0, 150.0},             // elbow
      {x, 250.0 * x, -170.0, 170.0},          // forearm roll
      {y, 100.0 * x, -170.0, 170.0},          // wrist pitch
      {x, 100.0 * x, -170.0, 170.0},          // wrist roll
  };
  arm.flange = 80.0 * x;
  arm.links = chain_link_capsules(arm.joints, arm.flange, {45.0, 40.0, 35.0, 30.0, 30.0, 40.0});
  // Palm only: the fingers around the tool centre point are not modelled.
  arm.links.back().local.b = 40.0 * x;
  return arm;
}

Robot default_robot() {
  Robot robot;
  robot.arms[index_of(ArmSide::right)] = default_arm("right", Posed::from_translation(0.0, -150.0, 850.0));
  robot.arms[index_of(ArmSide::left)] = default_arm("left", Posed::from_translation(0.0, 150.0, 850.0));
  robot.torso = {{{Vector3d(-150.0, 0.0, 600.0), Vector3d(-150.0, 0.0, 1250.0)}, 100.0}};
  JointVector right_home(6);
  right_home << -45.0, -45.0, 90.0, 0.0, 60.0, 0.0;
  JointVector left_home(6);
  left_home << 45.0, -45.0, 90.0, 0.0, 60.0, 0.0;
  robot.home = {right_home, left_home};
  return robot;
}

}  // namespace tether
