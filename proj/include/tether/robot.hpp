#pragma once

#include "tether/kinematics.hpp"

#include <array>

namespace tether {

enum class ArmSide : int { right = 0, left = 1 };

constexpr std::size_t index_of(ArmSide side) { return static_cast<std::size_t>(side); }
constexpr ArmSide other(ArmSide side) { return side == ArmSide::right ? ArmSide::left : ArmSide::right; }
const char* to_string(ArmSide side);

using DualJoints = std::array<JointVector, 2>;

struct Robot {
  std::array<ArmModel, 2> arms;   // indexed by ArmSide
  std::vector<Capsuled> torso;    // fixed body capsules in the robot frame
  DualJoints home;

  const ArmModel& arm(ArmSide side) const { return arms[index_of(side)]; }
};

/// Torso behind the origin, two 6-joint arms mounted at (0, -/+150, 850) mm:
/// a vertical 300 mm shoulder link, then 250/250/100/100/80 mm along the arm.
/// Limits +-170 deg except the elbow (0..150). The right arm is at -y.
Robot default_robot();

/// The default arm structure mounted at `base`.
ArmModel default_arm(const std::string& name, const Posed& base);

}  // namespace tether
