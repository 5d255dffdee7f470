#include "tether/kinematics.hpp"

#include <random>
#include <stdexcept>

namespace tether {

JointVector ArmModel::lower() const {
  JointVector v(dof());
  for (std::size_t i = 0; i < dof(); ++i) v[i] = joints[i].min_deg;
  return v;
}

JointVector ArmModel::upper() const {
  JointVector v(dof());
  for (std::size_t i = 0; i < dof(); ++i) v[i] = joints[i].max_deg;
  return v;
}

JointVector ArmModel::midpoint() const { return 0.5 * (lower() + upper()); }

void ArmModel::validate() const {
  if (joints.size() < 6) throw std::invalid_argument("arm '" + name + "' needs at least 6 joints");
  if (links.size() != joints.size()) throw std::invalid_argument("arm '" + name + "' needs one link capsule per joint");
  for (const Joint& j : joints) {
    if (!(j.min_deg < j.max_deg)) throw std::invalid_argument("arm '" + name + "' has an empty joint range");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw std::invalid_argument("arm '" + name + "' has a non-unit joint axis");
  }
  for (const LinkCapsule& l : links) {
    if (l.radius < 0) throw std::invalid_argument("arm '" + name + "' has a negative link radius");
  }
}

std::vector<LinkCapsule> chain_link_capsules(const std::vector<Joint>& joints, const Vector3d& flange,
                                             const std::vector<double>& radii) {
  if (radii.size() != joints.size()) throw std::invalid_argument("one radius per joint required");
  std::vector<LinkCapsule> out;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const Vector3d end = i + 1 < joints.size() ? joints[i + 1].offset : flange;
    out.push_back({{Vector3d::Zero(), end}, radii[i]});
  }
  return out;
}

namespace {

void check_size(const ArmModel& arm, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != arm.dof())
    throw std::invalid_argument("joint vector length " + std::to_string(q.size()) + " does not match arm '" +
                                arm.name + "' with " + std::to_string(arm.dof()) + " joints");
}

// Joint frames only; cheaper than the full result inside IK.
Posed chain(const ArmModel& arm, const JointVector& q, std::vector<Posed>* frames) {
  Matrix3d r = arm.base.rotation;
  Vector3d t = arm.base.translation;
  for (std::size_t i = 0; i < arm.dof(); ++i) {
    const Joint& j = arm.joints[i];
    t += r * j.offset;
    r = r * Eigen::AngleAxisd(deg2rad(q[static_cast<Eigen::Index>(i)]), j.axis).toRotationMatrix();
    if (frames) (*frames)[i] = Posed{r, t};
  }
  Posed ee;
  ee.rotation = r;
  ee.translation = t + r * arm.flange;
  return ee;
}

}  // namespace

ForwardResult forward_kinematics(const ArmModel& arm, const JointVector& q) {
  check_size(arm, q);
  ForwardResult out;
  out.joint_frames.resize(arm.dof());
  out.end_effector = chain(arm, q, &out.joint_frames);
  out.links.reserve(arm.links.size());
  for (std::size_t i = 0; i < arm.links.size(); ++i) {
    out.links.push_back({transform(out.joint_frames[i], arm.links[i].local), arm.links[i].radius});
  }
  return out;
}

Posed end_effector_pose(const ArmModel& arm, const JointVector& q) {
  check_size(arm, q);
  return chain(arm, q, nullptr);
}

namespace {

Jacobian jacobian_from_frames(const ArmModel& arm, const std::vector<Posed>& frames, const Vector3d& ee) {
  Jacobian jac(6, static_cast<Eigen::Index>(arm.dof()));
  for (std::size_t i = 0; i < arm.dof(); ++i) {
    const Vector3d z = frames[i].rotation * arm.joints[i].axis;
    const Vector3d r = ee - frames[i].translation;
    jac.block<3, 1>(0, static_cast<Eigen::Index>(i)) = z.cross(r);
    jac.block<3, 1>(3, static_cast<Eigen::Index>(i)) = z;
  }
  return jac;
}

}  // namespace

Jacobian jacobian(const ArmModel& arm, const JointVector& q) {
  check_size(arm, q);
  std::vector<Posed> frames(arm.dof());
  const Posed ee = chain(arm, q, &frames);
  return jacobian_from_frames(arm, frames, ee.translation);
}

double joint_limit_penalty(const ArmModel& arm, const JointVector& q) {
  check_size(arm, q);
  double p = 1.0;
  for (std::size_t i = 0; i < arm.dof(); ++i) {
    const Joint& j = arm.joints[i];
    const double range = j.max_deg - j.min_deg;
    const double v = q[static_cast<Eigen::Index>(i)];
    p *= std::max(0.0, 4.0 * (v - j.min_deg) * (j.max_deg - v) / (range * range));
  }
  return p;
}

double manipulability(const ArmModel& arm, const JointVector& q) {
  const double penalty = joint_limit_penalty(arm, q);
  if (penalty == 0.0) return 0.0;
  Jacobian jac = jacobian(arm, q);
  jac.topRows<3>() *= 1e-3;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(jac).singularValues();
  double yoshikawa = 1.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) yoshikawa *= sv[i];
  return yoshikawa * penalty;
}

bool within_limits(const ArmModel& arm, const JointVector& q, double slack_deg) {
  if (static_cast<std::size_t>(q.size()) != arm.dof()) return false;
  for (std::size_t i = 0; i < arm.dof(); ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (v < arm.joints[i].min_deg - slack_deg || v > arm.joints[i].max_deg + slack_deg) return false;
  }
  return true;
}

PoseError pose_error(const Posed& a, const Posed& b) {
  return {(a.translation - b.translation).norm(), rotation_angle_deg(a.rotation, b.rotation)};
}

double reach_bound(const ArmModel& arm) {
  double total = arm.flange.norm();
  for (std::size_t i = 1; i < arm.dof(); ++i) total += arm.joints[i].offset.norm();
  return total;
}

double max_joint_delta(const JointVector& a, const JointVector& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;

Vector6d weighted_error(const Posed& target, const Posed& current, double w) {
  Vector6d e;
  e.head<3>() = target.translation - current.translation;
  e.tail<3>() = w * rotation_log<double>(target.rotation * current.rotation.transpose());
  return e;
}

bool converged(const Posed& target, const Posed& current, const IkTolerance& tol) {
  const PoseError err = pose_error(target, current);
  return err.position_mm <= tol.mm && err.rotation_deg <= tol.deg;
}

// Levenberg-style damped least squares in radians; the damping is relative
// to the mean eigenvalue of J J^T so one value suits mm and rad rows alike.
std::optional<JointVector> descend(const ArmModel& arm, const Posed& target, JointVector q_deg, const IkOptions& opt) {
  const JointVector lo = arm.lower();
  const JointVector hi = arm.upper();
  q_deg = q_deg.cwiseMax(lo).cwiseMin(hi);
  // Aim slightly inside the tolerance so the verified result is not marginal.
  const IkTolerance inner{0.5 * opt.tolerance.mm, 0.5 * opt.tolerance.deg};
  std::vector<Posed> frames(arm.dof());
  Posed ee = chain(arm, q_deg, &frames);
  Vector6d err = weighted_error(target, ee, opt.rotation_weight_mm);
  double err_norm = err.norm();
  double lambda = opt.initial_damping;
  int stall = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (converged(target, ee, inner)) break;
    Jacobian jac = jacobian_from_frames(arm, frames, ee.translation);
    jac.bottomRows<3>() *= opt.rotation_weight_mm;
    const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose();
    const double mu = lambda * lambda * jjt.trace() / 6.0;
    const Vector6d y = (jjt + mu * Eigen::Matrix<double, 6, 6>::Identity()).ldlt().solve(err);
    Eigen::VectorXd dq = jac.transpose() * y;  // radians
    const double biggest = dq.cwiseAbs().maxCoeff();
    if (biggest > 0.35) dq *= 0.35 / biggest;
    JointVector trial = (q_deg + dq * (180.0 / std::numbers::pi)).cwiseMax(lo).cwiseMin(hi);
    std::vector<Posed> trial_frames(arm.dof());
    const Posed trial_ee = chain(arm, trial, &trial_frames);
    const Vector6d trial_err = weighted_error(target, trial_ee, opt.rotation_weight_mm);
    const double trial_norm = trial_err.norm();
    if (trial_norm < err_norm) {
      stall = (err_norm - trial_norm < 1e-9 * (1.0 + err_norm)) ? stall + 1 : 0;
      q_deg = trial;
      frames.swap(trial_frames);
      ee = trial_ee;
      err = trial_err;
      err_norm = trial_norm;
      lambda = std::max(lambda * 0.5, 1e-7);
    } else {
      lambda *= 2.0;
      ++stall;
      if (lambda > 1e4) break;
    }
    if (stall > 20) break;
  }
  if (!converged(target, ee, opt.tolerance) || !within_limits(arm, q_deg)) return std::nullopt;
  return q_deg;
}

}  // namespace

std::optional<JointVector> solve_ik_from(const ArmModel& arm, const Posed& target, const JointVector& start,
                                         const IkOptions& options) {
  check_size(arm, start);
  return descend(arm, target, start, options);
}

std::vector<JointVector> solve_ik(const ArmModel& arm, const Posed& target, const IkOptions& options) {
  if (!(options.tolerance.mm > 0) || !(options.tolerance.deg > 0))
    throw std::invalid_argument("IK tolerance must be positive");
  std::vector<JointVector> out;
  const double dist = (target.translation - (arm.base.apply(arm.joints.front().offset))).norm();
  if (dist > reach_bound(arm) + options.tolerance.mm) return out;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const JointVector lo = arm.lower();
  const JointVector hi = arm.upper();
  for (int r = 0; r < options.restarts; ++r) {
    JointVector start(arm.dof());
    if (r == 0) {
      start = arm.midpoint();
    } else {
      for (Eigen::Index i = 0; i < start.size(); ++i) start[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
    }
    auto q = descend(arm, target, start, options);
    if (!q) continue;
    bool duplicate = false;
    for (const JointVector& s : out) {
      if (max_joint_delta(s, *q) < options.duplicate_deg) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(*q);
    if (options.max_solutions && out.size() >= options.max_solutions) break;
  }
  return out;
}

}  // namespace tether
