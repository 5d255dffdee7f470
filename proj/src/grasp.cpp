#include "tether/grasp.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tether {

std::vector<Capsuled> collision_capsules(const ObjectShape& shape) {
  std::vector<Capsuled> out;
  for (const Primitive& p : shape.parts) {
    if (p.kind == PrimitiveKind::box) {
      Eigen::Index axis = 0;
      p.half_extents.maxCoeff(&axis);
      Vector3d dir = Vector3d::Zero();
      dir[axis] = p.half_extents[axis];
      double r2 = 0.0;
      for (Eigen::Index i = 0; i < 3; ++i) {
        if (i != axis) r2 += p.half_extents[i] * p.half_extents[i];
      }
      out.push_back({{p.pose.apply(-dir), p.pose.apply(dir)}, std::sqrt(r2)});
    } else {
      const Vector3d dir = p.half_length * Vector3d::UnitZ();
      out.push_back({{p.pose.apply(-dir), p.pose.apply(dir)}, p.radius});
    }
  }
  return out;
}

double shape_signed_distance(const ObjectShape& shape, const Vector3d& point) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& p : shape.parts) {
    double d = 0.0;
    if (p.kind == PrimitiveKind::box) {
      d = point_box_signed_distance(point, OrientedBoxd{p.pose, p.half_extents});
    } else {
      const Vector3d local = p.pose.rotation.transpose() * (point - p.pose.translation);
      const double radial = std::hypot(local.x(), local.y()) - p.radius;
      const double axial = std::abs(local.z()) - p.half_length;
      const double outside = std::hypot(std::max(radial, 0.0), std::max(axial, 0.0));
      d = outside + std::min(std::max(radial, axial), 0.0);
    }
    best = std::min(best, d);
  }
  return best;
}

namespace {

Posed hand_frame(const Vector3d& approach, const Vector3d& closing, const Vector3d& tcp) {
  Posed p;
  p.rotation.col(0) = approach.normalized();
  p.rotation.col(1) = closing.normalized();
  p.rotation.col(2) = p.rotation.col(0).cross(p.rotation.col(1));
  p.translation = tcp;
  return p;
}

bool width_fits(double width, const GripperSpec& g) { return width > g.min_width && width <= g.max_width; }

void box_grasps(const Primitive& part, const GraspSamplerParams& params, std::vector<GraspCandidate>& out) {
  const Vector3d h = part.half_extents;
  for (int a = 0; a < 3; ++a) {
    if (part.blocked_axes[static_cast<std::size_t>(a)]) continue;
    const double width = 2.0 * h[a];
    if (!width_fits(width, params.gripper)) continue;
    const Vector3d closing = Vector3d::Unit(a);
    // Approach directions rotate about the closing axis in equal steps.
    const int b = (a + 1) % 3;
    for (int k = 0; k < params.approach_count; ++k) {
      const double angle = 360.0 * k / params.approach_count;
      const Vector3d approach = axis_angle_deg<double>(closing, angle) * Vector3d::Unit(b);
      const Vector3d slide = approach.cross(closing);
      const double depth = (approach.cwiseAbs().array() * h.array()).sum();
      if (depth > params.gripper.finger_depth + 1e-9) continue;
      const double slide_room = (slide.cwiseAbs().array() * h.array()).sum();
      for (double offset : params.slide_offsets) {
        if (std::abs(offset) > slide_room + 1e-9) continue;
        const Vector3d tcp = offset * slide;
        const Posed local = hand_frame(approach, closing, tcp);
        out.push_back({compose(part.pose, local), width});
      }
    }
  }
}

void cylinder_grasps(const Primitive& part, const GraspSamplerParams& params, std::vector<GraspCandidate>& out) {
  const double width = 2.0 * part.radius;
  if (!width_fits(width, params.gripper) || part.radius > params.gripper.finger_depth + 1e-9) return;
  for (int k = 0; k < params.approach_count; ++k) {
    const double angle = deg2rad(360.0 * k / params.approach_count);
    const Vector3d approach(std::cos(angle), std::sin(angle), 0.0);
    const Vector3d closing = Vector3d::UnitZ().cross(approach);
    for (double offset : params.slide_offsets) {
      if (std::abs(offset) > part.half_length + 1e-9) continue;
      const Posed local = hand_frame(approach, closing, offset * Vector3d::UnitZ());
      out.push_back({compose(part.pose, local), width});
    }
  }
}

}  // namespace

std::vector<GraspCandidate> generate_grasps(const ObjectShape& object, const GraspSamplerParams& params) {
  std::vector<GraspCandidate> out;
  for (const Primitive& part : object.parts) {
    if (!part.graspable) continue;
    if (part.kind == PrimitiveKind::box) {
      box_grasps(part, params, out);
    } else {
      cylinder_grasps(part, params, out);
    }
  }
  return out;
}

std::array<Vector3d, 2> pad_points(const GraspCandidate& grasp) {
  const Vector3d half = 0.5 * grasp.gripper_width * grasp.closing_dir_local();
  return {grasp.hand_pose_local.translation + half, grasp.hand_pose_local.translation - half};
}

void GraspDatabase::set(const std::string& object, std::vector<GraspCandidate> grasps) {
  grasps_[object] = std::move(grasps);
}

bool GraspDatabase::contains(const std::string& object) const { return grasps_.count(object) > 0; }

const std::vector<GraspCandidate>& GraspDatabase::at(const std::string& object) const {
  auto it = grasps_.find(object);
  if (it == grasps_.end()) throw std::out_of_range("no grasps for object '" + object + "'");
  return it->second;
}

std::vector<std::string> GraspDatabase::objects() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : grasps_) out.push_back(name);
  return out;
}

void GraspDatabase::write(std::ostream& out) const {
  out << "# object r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz width\n";
  char buf[64];
  for (const auto& [name, list] : grasps_) {
    for (const GraspCandidate& g : list) {
      out << name;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          std::snprintf(buf, sizeof buf, " %.17g", g.hand_pose_local.rotation(r, c));
          out << buf;
        }
      }
      for (int i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof buf, " %.17g", g.hand_pose_local.translation[i]);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, " %.17g", g.gripper_width);
      out << buf << '\n';
    }
  }
}

GraspDatabase GraspDatabase::read(std::istream& in) {
  GraspDatabase db;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string name;
    GraspCandidate g;
    fields >> name;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) fields >> g.hand_pose_local.rotation(r, c);
    for (int i = 0; i < 3; ++i) fields >> g.hand_pose_local.translation[i];
    fields >> g.gripper_width;
    std::string extra;
    if (fields.fail() || (fields >> extra))
      throw std::runtime_error("grasp database line " + std::to_string(line_no) + ": expected 14 fields");
    if (orthonormality_error(g.hand_pose_local.rotation) > 1e-6 || g.hand_pose_local.rotation.determinant() < 0)
      throw std::runtime_error("grasp database line " + std::to_string(line_no) + ": rotation is not orthonormal");
    db.grasps_[name].push_back(g);
  }
  return db;
}

void GraspDatabase::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grasp database '" + path + "'");
  write(out);
}

GraspDatabase GraspDatabase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read grasp database '" + path + "'");
  return read(in);
}

}  // namespace tether
