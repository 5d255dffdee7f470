#pragma once

// A naive homogeneous-matrix chain for checking forward kinematics.

#include "support.hpp"
#include "tether/kinematics.hpp"

namespace test {

using tether::ArmModel;
using tether::JointVector;

using Mat4 = Eigen::Matrix4d;

inline Mat4 translation4(const Vector3d& t) {
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 3) = t;
  return m;
}

// Rodrigues' formula, written out.
inline Mat4 rotation4(const Vector3d& axis, double deg) {
  const double a = deg * M_PI / 180.0;
  const Vector3d k = axis.normalized();
  Matrix3d K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = Matrix3d::Identity() + std::sin(a) * K + (1.0 - std::cos(a)) * K * K;
  return m;
}

inline Mat4 naive_chain(const ArmModel& arm, const JointVector& q) {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = arm.base.rotation;
  m.block<3, 1>(0, 3) = arm.base.translation;
  for (std::size_t j = 0; j < arm.dof(); ++j)
    m = m * translation4(arm.joints[j].offset) * rotation4(arm.joints[j].axis, q[static_cast<Eigen::Index>(j)]);
  return m * translation4(arm.flange);
}

inline JointVector random_q(Gen& g, const ArmModel& arm, double inset = 0.0) {
  JointVector q(static_cast<Eigen::Index>(arm.dof()));
  for (std::size_t j = 0; j < arm.dof(); ++j)
    q[static_cast<Eigen::Index>(j)] = g.uniform(arm.joints[j].min_deg + inset, arm.joints[j].max_deg - inset);
  return q;
}

}  // namespace test
