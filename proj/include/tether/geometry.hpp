#pragma once

// Rigid transforms and closest-distance queries between segments, capsules
// and oriented boxes. Lengths are millimetres, angles at the API are degrees.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace tether {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vector3d = Vec3<double>;
using Matrix3d = Mat3<double>;

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Rigid transform: x_parent = rotation * x_child + translation.
template <typename Scalar>
struct Pose {
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();

  static Pose identity() { return {}; }

  static Pose from_translation(Scalar x, Scalar y, Scalar z) {
    Pose p;
    p.translation = Vec3<Scalar>(x, y, z);
    return p;
  }

  static Pose from_translation(const Vec3<Scalar>& t) {
    Pose p;
    p.translation = t;
    return p;
  }

  static Pose from_rotation(const Mat3<Scalar>& r) {
    Pose p;
    p.rotation = r;
    return p;
  }

  Vec3<Scalar> apply(const Vec3<Scalar>& point) const { return rotation * point + translation; }
  Vec3<Scalar> apply_vector(const Vec3<Scalar>& v) const { return rotation * v; }
};

using Posed = Pose<double>;

template <typename Scalar>
Mat3<Scalar> axis_angle_deg(const Vec3<Scalar>& axis, Scalar angle_deg) {
  return Eigen::AngleAxis<Scalar>(deg2rad(angle_deg), axis.normalized()).toRotationMatrix();
}

template <typename Scalar>
Mat3<Scalar> rot_x(Scalar deg) {
  return axis_angle_deg<Scalar>(Vec3<Scalar>::UnitX(), deg);
}
template <typename Scalar>
Mat3<Scalar> rot_y(Scalar deg) {
  return axis_angle_deg<Scalar>(Vec3<Scalar>::UnitY(), deg);
}
template <typename Scalar>
Mat3<Scalar> rot_z(Scalar deg) {
  return axis_angle_deg<Scalar>(Vec3<Scalar>::UnitZ(), deg);
}

/// Closest orthonormal matrix with det +1 (polar factor via SVD).
template <typename Scalar>
Mat3<Scalar> orthonormalize(const Mat3<Scalar>& r) {
  Eigen::JacobiSVD<Mat3<Scalar>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3<Scalar> u = svd.matrixU();
  const Mat3<Scalar>& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

template <typename Scalar>
Scalar orthonormality_error(const Mat3<Scalar>& r) {
  return (r.transpose() * r - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff();
}

/// Applies b first, then a.
template <typename Scalar>
Pose<Scalar> compose(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  Pose<Scalar> out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (orthonormality_error(out.rotation) > Scalar(1e-12)) out.rotation = orthonormalize(out.rotation);
  return out;
}

template <typename Scalar>
Pose<Scalar> inverse(const Pose<Scalar>& a) {
  Pose<Scalar> out;
  out.rotation = a.rotation.transpose();
  out.translation = -(out.rotation * a.translation);
  return out;
}

/// Geodesic angle between two rotations, degrees in [0, 180].
template <typename Scalar>
Scalar rotation_angle_deg(const Mat3<Scalar>& a, const Mat3<Scalar>& b) {
  const Scalar c = std::clamp((Scalar((a.transpose() * b).trace()) - Scalar(1)) / Scalar(2), Scalar(-1), Scalar(1));
  return rad2deg(std::acos(c));
}

/// Rotation vector (axis * angle, radians) of r.
template <typename Scalar>
Vec3<Scalar> rotation_log(const Mat3<Scalar>& r) {
  Eigen::AngleAxis<Scalar> aa(r);
  return aa.axis() * aa.angle();
}

/// Smallest rotation taking unit vector `from` onto unit vector `to`.
template <typename Scalar>
Mat3<Scalar> minimal_rotation(const Vec3<Scalar>& from, const Vec3<Scalar>& to) {
  return Eigen::Quaternion<Scalar>::FromTwoVectors(from, to).toRotationMatrix();
}

template <typename Scalar>
struct Segment {
  Vec3<Scalar> a = Vec3<Scalar>::Zero();
  Vec3<Scalar> b = Vec3<Scalar>::Zero();

  Vec3<Scalar> at(Scalar t) const { return a + t * (b - a); }
  Scalar length() const { return (b - a).norm(); }
};

using Segmentd = Segment<double>;

template <typename Scalar>
Segment<Scalar> transform(const Pose<Scalar>& pose, const Segment<Scalar>& s) {
  return {pose.apply(s.a), pose.apply(s.b)};
}

template <typename Scalar>
struct Capsule {
  Segment<Scalar> axis;
  Scalar radius = 0;
};

using Capsuled = Capsule<double>;

template <typename Scalar>
struct OrientedBox {
  Pose<Scalar> pose;  // box centre and axes
  Vec3<Scalar> half_extents = Vec3<Scalar>::Zero();
};

using OrientedBoxd = OrientedBox<double>;

template <typename Scalar>
struct ClosestPoints {
  Scalar distance = 0;
  Vec3<Scalar> on_first = Vec3<Scalar>::Zero();
  Vec3<Scalar> on_second = Vec3<Scalar>::Zero();
};

template <typename Scalar>
ClosestPoints<Scalar> point_segment_distance(const Vec3<Scalar>& p, const Segment<Scalar>& s) {
  const Vec3<Scalar> d = s.b - s.a;
  const Scalar dd = d.squaredNorm();
  Scalar t = 0;
  if (dd > Scalar(0)) t = std::clamp(Scalar((p - s.a).dot(d) / dd), Scalar(0), Scalar(1));
  const Vec3<Scalar> c = s.a + t * d;
  return {(p - c).norm(), p, c};
}

namespace detail {

// Clamped two-parameter minimisation for one argument order.
template <typename Scalar>
ClosestPoints<Scalar> segment_segment_ordered(const Segment<Scalar>& s1, const Segment<Scalar>& s2) {
  constexpr Scalar kEps = Scalar(1e-18);
  const Vec3<Scalar> d1 = s1.b - s1.a;
  const Vec3<Scalar> d2 = s2.b - s2.a;
  const Vec3<Scalar> r = s1.a - s2.a;
  const Scalar a = d1.squaredNorm();
  const Scalar e = d2.squaredNorm();
  const Scalar f = d2.dot(r);
  Scalar s = 0;
  Scalar t = 0;
  if (a <= kEps && e <= kEps) {
    // both degenerate
  } else if (a <= kEps) {
    t = std::clamp(f / e, Scalar(0), Scalar(1));
  } else {
    const Scalar c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, Scalar(0), Scalar(1));
    } else {
      const Scalar b = d1.dot(d2);
      const Scalar denom = a * e - b * b;
      if (denom > kEps * a * e) s = std::clamp((b * f - c * e) / denom, Scalar(0), Scalar(1));
      t = (b * s + f) / e;
      if (t < Scalar(0)) {
        t = 0;
        s = std::clamp(-c / a, Scalar(0), Scalar(1));
      } else if (t > Scalar(1)) {
        t = 1;
        s = std::clamp((b - c) / a, Scalar(0), Scalar(1));
      }
    }
  }
  const Vec3<Scalar> c1 = s1.a + s * d1;
  const Vec3<Scalar> c2 = s2.a + t * d2;
  return {(c1 - c2).norm(), c1, c2};
}

}  // namespace detail

/// Global minimum distance between two segments and a witness pair.
/// Degenerate segments behave as points. Both argument orders are evaluated
/// and the smaller result kept, so the value is symmetric.
template <typename Scalar>
ClosestPoints<Scalar> segment_segment_distance(const Segment<Scalar>& s1, const Segment<Scalar>& s2) {
  ClosestPoints<Scalar> fwd = detail::segment_segment_ordered(s1, s2);
  ClosestPoints<Scalar> rev = detail::segment_segment_ordered(s2, s1);
  if (rev.distance < fwd.distance) return {rev.distance, rev.on_second, rev.on_first};
  return fwd;
}

/// Signed clearance between a segment and a capsule surface; negative inside.
template <typename Scalar>
Scalar segment_capsule_distance(const Segment<Scalar>& s, const Capsule<Scalar>& capsule) {
  return segment_segment_distance(s, capsule.axis).distance - capsule.radius;
}

template <typename Scalar>
Scalar capsule_capsule_distance(const Capsule<Scalar>& a, const Capsule<Scalar>& b) {
  return segment_segment_distance(a.axis, b.axis).distance - a.radius - b.radius;
}

/// Signed distance from a point to a box surface (negative inside).
template <typename Scalar>
Scalar point_box_signed_distance(const Vec3<Scalar>& p, const OrientedBox<Scalar>& box) {
  const Vec3<Scalar> local = box.pose.rotation.transpose() * (p - box.pose.translation);
  const Vec3<Scalar> q = local.cwiseAbs() - box.half_extents;
  const Scalar outside = q.cwiseMax(Scalar(0)).norm();
  const Scalar inside = std::min(q.maxCoeff(), Scalar(0));
  return outside + inside;
}

/// Closest point on (or in) the box to p, by clamped projection in the box frame.
template <typename Scalar>
Vec3<Scalar> closest_point_on_box(const Vec3<Scalar>& p, const OrientedBox<Scalar>& box) {
  const Vec3<Scalar> local = box.pose.rotation.transpose() * (p - box.pose.translation);
  const Vec3<Scalar> clamped = local.cwiseMax(-box.half_extents).cwiseMin(box.half_extents);
  return box.pose.apply(clamped);
}

/// Signed clearance between a segment and a box: the minimum over the segment
/// of the box signed distance. That function is convex along the segment, so
/// a golden-section search converges to the global minimum.
template <typename Scalar>
std::pair<Scalar, Vec3<Scalar>> segment_box_distance(const Segment<Scalar>& s, const OrientedBox<Scalar>& box) {
  auto f = [&](Scalar t) { return point_box_signed_distance(s.at(t), box); };
  constexpr Scalar kInvPhi = Scalar(0.6180339887498949);
  Scalar lo = 0;
  Scalar hi = 1;
  Scalar x1 = hi - kInvPhi * (hi - lo);
  Scalar x2 = lo + kInvPhi * (hi - lo);
  Scalar f1 = f(x1);
  Scalar f2 = f(x2);
  for (int i = 0; i < 90 && hi - lo > Scalar(1e-15); ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  Scalar best_t = Scalar(0.5) * (lo + hi);
  Scalar best = f(best_t);
  for (Scalar t : {Scalar(0), Scalar(1)}) {
    const Scalar v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return {best, s.at(best_t)};
}

template <typename Scalar>
Scalar capsule_box_distance(const Capsule<Scalar>& c, const OrientedBox<Scalar>& box) {
  return segment_box_distance(c.axis, box).first - c.radius;
}

}  // namespace tether
