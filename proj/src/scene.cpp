#include "tether/scene.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tether {

using nlohmann::json;

Matrix3d rpy_deg(double roll, double pitch, double yaw) { return rot_z(yaw) * rot_y(pitch) * rot_x(roll); }

Vector3d to_rpy_deg(const Matrix3d& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll = 0.0;
  double yaw = 0.0;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: fold everything into yaw.
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return {rad2deg(roll), rad2deg(pitch), rad2deg(yaw)};
}

namespace {

Posed pose(double x, double y, double z, const Matrix3d& r) {
  Posed p = Posed::from_translation(x, y, z);
  p.rotation = r;
  return p;
}

// Tool standing on its nose with the tail up, turned by `yaw` about the
// vertical.
Matrix3d upright(double yaw) { return rpy_deg(0.0, 90.0, yaw); }

// Upright tool tipped by `angle` degrees about the robot x axis; negative
// angles lay the tail over toward +y.
Matrix3d tipped(double angle) { return rot_x(angle) * upright(0.0); }

// Tool lying on the table with its tail pointing along `heading` degrees in
// the horizontal plane (0 = +x) and its y axis pointing down.
Matrix3d lying(double heading) {
  const double h = deg2rad(heading);
  const Vector3d x(-std::cos(h), -std::sin(h), 0.0);
  const Vector3d y = -Vector3d::UnitZ();
  Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = x.cross(y);
  return r;
}

ObjectShape default_tool() {
  Primitive body;
  body.kind = PrimitiveKind::box;
  body.half_extents = Vector3d(90.0, 20.0, 25.0);
  return {"tool", {body}};
}

ObjectShape default_slider() {
  Primitive sleeve;
  sleeve.kind = PrimitiveKind::cylinder;
  sleeve.radius = 15.0;
  sleeve.half_length = 25.0;
  return {"slider", {sleeve}};
}

}  // namespace

SceneConfig default_scene() {
  SceneConfig s;
  s.robot = default_robot();
  s.tool_sampler.gripper = s.gripper;
  s.tool_sampler.approach_count = 4;
  s.tool_sampler.slide_offsets = {-55.0, 0.0, 55.0};
  s.slider_sampler.gripper = s.gripper;
  s.slider_sampler.approach_count = 8;
  s.slider_sampler.slide_offsets = {0.0};
  s.tool.shape = default_tool();
  s.tool.tail_local = Vector3d(-90.0, 0.0, 0.0);
  s.slider = default_slider();
  // Slider x axis toward the robot.
  s.slider_rotation = rot_z(180.0);

  s.benchmark_start = pose(450.0, 0.0, 790.0, upright(0.0));
  s.goal_poses = {
      pose(420.0, -150.0, 790.0, upright(0.0)),
      pose(500.0, 150.0, 900.0, tipped(-60.0)),
      pose(420.0, 0.0, 720.0, lying(90.0)),
      pose(430.0, -150.0, 1000.0, tipped(-30.0)),
      pose(400.0, 150.0, 1000.0, lying(135.0)),
      pose(450.0, -150.0, 900.0, lying(180.0)),
      pose(400.0, 150.0, 790.0, upright(-45.0)),
  };
  s.benchmarks = {{1, 6, 3}, {2, 1, 3}, {3, 4, 5}, {4, 1, 5}, {7, 6, 2}, {5, 4, 1}};
  s.handover_pose = pose(400.0, 0.0, 1050.0, upright(0.0));

  s.obstacle.start = pose(420.0, -150.0, 790.0, upright(0.0));
  s.obstacle.goals = {3, 2};
  return s;
}

SceneObstacles SceneConfig::obstacles() const {
  SceneObstacles o;
  o.table = table;
  o.margin = margin;
  return o;
}

std::vector<Posed> SceneConfig::benchmark_goals(int id) const {
  if (id < 1 || id > static_cast<int>(benchmarks.size()))
    throw std::out_of_range("benchmark id " + std::to_string(id) + " not in 1.." + std::to_string(benchmarks.size()));
  std::vector<Posed> goals;
  for (int g : benchmarks[static_cast<std::size_t>(id - 1)]) goals.push_back(goal_poses.at(static_cast<std::size_t>(g - 1)));
  return goals;
}

void SceneConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scene: " + what); };
  for (const ArmModel& arm : robot.arms) arm.validate();
  for (std::size_t i = 0; i < 2; ++i) {
    if (robot.home[i].size() != static_cast<Eigen::Index>(robot.arms[i].dof())) fail("home configuration length");
  }
  if ((table.half_extents.array() <= 0.0).any()) fail("table half extents must be positive");
  if (margin < 0.0) fail("margin must be non-negative");
  if (tool.shape.parts.empty() || slider.parts.empty()) fail("tool and slider need at least one part");
  if (tool.shape.name == slider.name) fail("tool and slider need distinct names");
  if (orthonormality_error(slider_rotation) > 1e-6) fail("slider rotation is not orthonormal");
  if (std::abs(tool.tail_frame.reference.norm() - 1.0) > 1e-9 || std::abs(tool.tail_frame.plane_normal.norm() - 1.0) > 1e-9)
    fail("tail frame vectors must be unit length");
  if (std::abs(tool.tail_frame.reference.dot(tool.tail_frame.plane_normal)) > 1e-9) fail("tail reference must lie in the plane");
  if (gripper.max_width <= gripper.min_width) fail("gripper range is empty");
  for (const auto& b : benchmarks) {
    for (int g : b) {
      if (g < 1 || g > static_cast<int>(goal_poses.size())) fail("benchmark refers to goal " + std::to_string(g));
    }
  }
  for (int g : obstacle.goals) {
    if (g < 1 || g > static_cast<int>(goal_poses.size())) fail("obstacle task refers to goal " + std::to_string(g));
  }
  if (obstacle.trials < 0) fail("trial count must be non-negative");
  if ((obstacle.box_min_half.array() <= 0.0).any() || (obstacle.box_max_half.array() < obstacle.box_min_half.array()).any())
    fail("obstacle box size range");
  if (cmms.alpha_s <= 0.0) fail("alpha_s must be positive");
  if (cmms.acc_threshold < 0.0) fail("accumulation threshold must be non-negative");
  if (planner.step_deg <= 0.0) fail("planner step must be positive");
  if (workspace.spacing <= 0.0) fail("grid spacing must be positive");
  if ((workspace.upper.array() < workspace.lower.array()).any()) fail("grid bounds are inverted");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json vec(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Vector3d vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose_json(const Posed& p) { return {{"xyz", vec(p.translation)}, {"rpy", vec(to_rpy_deg(p.rotation))}}; }

Posed pose_from(const json& j) {
  Posed p;
  if (j.contains("xyz")) p.translation = vec(j["xyz"]);
  if (j.contains("rpy")) {
    const Vector3d r = vec(j["rpy"]);
    p.rotation = rpy_deg(r.x(), r.y(), r.z());
  }
  return p;
}

json joints_json(const JointVector& q) { return std::vector<double>(q.data(), q.data() + q.size()); }

JointVector joints_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const JointVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json capsule_json(const Segmentd& s, double radius) { return {{"a", vec(s.a)}, {"b", vec(s.b)}, {"radius", radius}}; }

json shape_json(const ObjectShape& shape) {
  json parts = json::array();
  for (const Primitive& p : shape.parts) {
    json part = {{"kind", p.kind == PrimitiveKind::box ? "box" : "cylinder"}, {"pose", pose_json(p.pose)}, {"graspable", p.graspable}};
    if (p.kind == PrimitiveKind::box) {
      part["half_extents"] = vec(p.half_extents);
      part["blocked_axes"] = p.blocked_axes;
    } else {
      part["radius"] = p.radius;
      part["half_length"] = p.half_length;
    }
    parts.push_back(part);
  }
  return {{"name", shape.name}, {"parts", parts}};
}

ObjectShape shape_from(const json& j) {
  ObjectShape shape;
  shape.name = j.at("name").get<std::string>();
  for (const json& part : j.at("parts")) {
    Primitive p;
    const std::string kind = part.at("kind").get<std::string>();
    if (kind == "box") {
      p.kind = PrimitiveKind::box;
      p.half_extents = vec(part.at("half_extents"));
      if (part.contains("blocked_axes")) p.blocked_axes = part["blocked_axes"].get<std::array<bool, 3>>();
    } else if (kind == "cylinder") {
      p.kind = PrimitiveKind::cylinder;
      p.radius = part.at("radius").get<double>();
      p.half_length = part.at("half_length").get<double>();
    } else {
      throw std::invalid_argument("unknown primitive kind '" + kind + "'");
    }
    if (part.contains("pose")) p.pose = pose_from(part["pose"]);
    p.graspable = part.value("graspable", true);
    shape.parts.push_back(p);
  }
  return shape;
}

json arm_json(const ArmModel& arm) {
  json joints = json::array();
  for (const Joint& jt : arm.joints)
    joints.push_back({{"axis", vec(jt.axis)}, {"offset", vec(jt.offset)}, {"limits", {jt.min_deg, jt.max_deg}}});
  json links = json::array();
  for (const LinkCapsule& l : arm.links) links.push_back(capsule_json(l.local, l.radius));
  return {{"name", arm.name}, {"base", pose_json(arm.base)}, {"joints", joints}, {"flange", vec(arm.flange)}, {"links", links}};
}

ArmModel arm_from(const json& j) {
  ArmModel arm;
  arm.name = j.at("name").get<std::string>();
  arm.base = pose_from(j.at("base"));
  for (const json& jt : j.at("joints")) {
    const auto limits = jt.at("limits").get<std::array<double, 2>>();
    arm.joints.push_back({vec(jt.at("axis")), vec(jt.at("offset")), limits[0], limits[1]});
  }
  arm.flange = vec(j.at("flange"));
  for (const json& l : j.at("links")) arm.links.push_back({{vec(l.at("a")), vec(l.at("b"))}, l.at("radius").get<double>()});
  return arm;
}

json sampler_json(const GraspSamplerParams& p) {
  return {{"approach_count", p.approach_count}, {"slide_offsets", p.slide_offsets}};
}

void sampler_from(const json& j, GraspSamplerParams& p) {
  if (j.contains("approach_count")) p.approach_count = j["approach_count"].get<int>();
  if (j.contains("slide_offsets")) p.slide_offsets = j["slide_offsets"].get<std::vector<double>>();
}

ArmSide side_from(const json& j) {
  const std::string s = j.get<std::string>();
  if (s == "right") return ArmSide::right;
  if (s == "left") return ArmSide::left;
  throw std::invalid_argument("arm must be 'right' or 'left', got '" + s + "'");
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

void read_vec_if(const json& j, const char* key, Vector3d& out) {
  if (j.contains(key)) out = vec(j[key]);
}

}  // namespace

std::string scene_to_json(const SceneConfig& s) {
  json j;
  json torso = json::array();
  for (const Capsuled& c : s.robot.torso) torso.push_back(capsule_json(c.axis, c.radius));
  j["robot"] = {{"arms", {arm_json(s.robot.arms[0]), arm_json(s.robot.arms[1])}},
                {"torso", torso},
                {"home", {joints_json(s.robot.home[0]), joints_json(s.robot.home[1])}}};
  j["gripper"] = {{"min_width", s.gripper.min_width}, {"max_width", s.gripper.max_width}, {"finger_depth", s.gripper.finger_depth}};
  j["grasp_sampler"] = {{"tool", sampler_json(s.tool_sampler)}, {"slider", sampler_json(s.slider_sampler)}};
  j["tool"] = {{"shape", shape_json(s.tool.shape)},
               {"tail", vec(s.tool.tail_local)},
               {"reference", vec(s.tool.tail_frame.reference)},
               {"plane_normal", vec(s.tool.tail_frame.plane_normal)},
               {"beta", s.tool.beta}};
  j["slider"] = {{"shape", shape_json(s.slider)}, {"rpy", vec(to_rpy_deg(s.slider_rotation))}};
  j["table"] = {{"pose", pose_json(s.table.pose)}, {"half_extents", vec(s.table.half_extents)}};
  j["margin"] = s.margin;
  j["anchor"] = {{"mode", s.anchor.mode == AnchorMode::balancer ? "balancer" : "table_corner"},
                 {"balancer", vec(s.anchor.balancer)},
                 {"table_corner", vec(s.anchor.table_corner)}};
  j["benchmark_start"] = pose_json(s.benchmark_start);
  j["goal_poses"] = json::array();
  for (const Posed& p : s.goal_poses) j["goal_poses"].push_back(pose_json(p));
  j["benchmarks"] = s.benchmarks;
  j["handover_pose"] = pose_json(s.handover_pose);
  j["obstacle_trials"] = {{"trials", s.obstacle.trials},
                          {"start", pose_json(s.obstacle.start)},
                          {"goals", s.obstacle.goals},
                          {"box_min_half", vec(s.obstacle.box_min_half)},
                          {"box_max_half", vec(s.obstacle.box_max_half)},
                          {"footprint_clearance", s.obstacle.footprint_clearance}};
  j["planner"] = {{"step_deg", s.planner.step_deg},
                  {"goal_bias", s.planner.goal_bias},
                  {"shortcut_iterations", s.planner.shortcut_iterations},
                  {"max_iterations", s.planner.max_iterations},
                  {"segment_timeout_s", s.planner.segment_timeout_s},
                  {"ik_restarts", s.planner.ik_restarts},
                  {"replan_attempts", s.planner.replan_attempts}};
  j["cmms"] = {{"acc_threshold", s.cmms.acc_threshold},
               {"alpha_s", s.cmms.alpha_s},
               {"alpha_reduction", s.cmms.alpha_reduction},
               {"min_height", s.cmms.min_height},
               {"max_step_jump_deg", s.cmms.max_step_jump_deg},
               {"preferred_tool_arm", to_string(s.cmms.preferred_tool_arm)}};
  j["workspace"] = {{"lower", vec(s.workspace.lower)},
                    {"upper", vec(s.workspace.upper)},
                    {"spacing", s.workspace.spacing},
                    {"reference", vec(s.workspace.reference)},
                    {"m_fraction", s.workspace.m_fraction},
                    {"g_fraction", s.workspace.g_fraction},
                    {"cable_arm", to_string(s.workspace.cable_arm)},
                    {"ik_restarts", s.workspace.ik_restarts}};
  j["grasp_database"] = s.grasp_database;
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

SceneConfig parse_scene(const std::string& text) {
  SceneConfig s = default_scene();
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scene is not valid JSON: ") + e.what());
  }
  try {
    if (j.contains("robot")) {
      const json& r = j["robot"];
      if (r.contains("arms")) {
        if (r["arms"].size() != 2) throw std::invalid_argument("robot needs exactly two arms");
        for (std::size_t i = 0; i < 2; ++i) s.robot.arms[i] = arm_from(r["arms"][i]);
      }
      if (r.contains("torso")) {
        s.robot.torso.clear();
        for (const json& c : r["torso"]) s.robot.torso.push_back({{vec(c.at("a")), vec(c.at("b"))}, c.at("radius").get<double>()});
      }
      if (r.contains("home")) {
        if (r["home"].size() != 2) throw std::invalid_argument("home needs two configurations");
        for (std::size_t i = 0; i < 2; ++i) s.robot.home[i] = joints_from(r["home"][i]);
      }
    }
    if (j.contains("gripper")) {
      const json& g = j["gripper"];
      read_if(g, "min_width", s.gripper.min_width);
      read_if(g, "max_width", s.gripper.max_width);
      read_if(g, "finger_depth", s.gripper.finger_depth);
    }
    s.tool_sampler.gripper = s.gripper;
    s.slider_sampler.gripper = s.gripper;
    if (j.contains("grasp_sampler")) {
      if (j["grasp_sampler"].contains("tool")) sampler_from(j["grasp_sampler"]["tool"], s.tool_sampler);
      if (j["grasp_sampler"].contains("slider")) sampler_from(j["grasp_sampler"]["slider"], s.slider_sampler);
    }
    if (j.contains("tool")) {
      const json& t = j["tool"];
      if (t.contains("shape")) s.tool.shape = shape_from(t["shape"]);
      read_vec_if(t, "tail", s.tool.tail_local);
      read_vec_if(t, "reference", s.tool.tail_frame.reference);
      read_vec_if(t, "plane_normal", s.tool.tail_frame.plane_normal);
      read_if(t, "beta", s.tool.beta);
    }
    if (j.contains("slider")) {
      const json& t = j["slider"];
      if (t.contains("shape")) s.slider = shape_from(t["shape"]);
      if (t.contains("rpy")) {
        const Vector3d r = vec(t["rpy"]);
        s.slider_rotation = rpy_deg(r.x(), r.y(), r.z());
      }
    }
    if (j.contains("table")) {
      if (j["table"].contains("pose")) s.table.pose = pose_from(j["table"]["pose"]);
      read_vec_if(j["table"], "half_extents", s.table.half_extents);
    }
    read_if(j, "margin", s.margin);
    if (j.contains("anchor")) {
      const json& a = j["anchor"];
      if (a.contains("mode")) {
        const std::string mode = a["mode"].get<std::string>();
        if (mode == "balancer") {
          s.anchor.mode = AnchorMode::balancer;
        } else if (mode == "table_corner") {
          s.anchor.mode = AnchorMode::table_corner;
        } else {
          throw std::invalid_argument("anchor mode must be 'balancer' or 'table_corner', got '" + mode + "'");
        }
      }
      read_vec_if(a, "balancer", s.anchor.balancer);
      read_vec_if(a, "table_corner", s.anchor.table_corner);
    }
    if (j.contains("benchmark_start")) s.benchmark_start = pose_from(j["benchmark_start"]);
    if (j.contains("goal_poses")) {
      s.goal_poses.clear();
      for (const json& p : j["goal_poses"]) s.goal_poses.push_back(pose_from(p));
    }
    if (j.contains("benchmarks")) s.benchmarks = j["benchmarks"].get<std::vector<std::array<int, 3>>>();
    if (j.contains("handover_pose")) s.handover_pose = pose_from(j["handover_pose"]);
    if (j.contains("obstacle_trials")) {
      const json& o = j["obstacle_trials"];
      read_if(o, "trials", s.obstacle.trials);
      if (o.contains("start")) s.obstacle.start = pose_from(o["start"]);
      read_if(o, "goals", s.obstacle.goals);
      read_vec_if(o, "box_min_half", s.obstacle.box_min_half);
      read_vec_if(o, "box_max_half", s.obstacle.box_max_half);
      read_if(o, "footprint_clearance", s.obstacle.footprint_clearance);
    }
    if (j.contains("planner")) {
      const json& p = j["planner"];
      read_if(p, "step_deg", s.planner.step_deg);
      read_if(p, "goal_bias", s.planner.goal_bias);
      read_if(p, "shortcut_iterations", s.planner.shortcut_iterations);
      read_if(p, "max_iterations", s.planner.max_iterations);
      read_if(p, "segment_timeout_s", s.planner.segment_timeout_s);
      read_if(p, "ik_restarts", s.planner.ik_restarts);
      read_if(p, "replan_attempts", s.planner.replan_attempts);
    }
    if (j.contains("cmms")) {
      const json& c = j["cmms"];
      read_if(c, "acc_threshold", s.cmms.acc_threshold);
      read_if(c, "alpha_s", s.cmms.alpha_s);
      read_if(c, "alpha_reduction", s.cmms.alpha_reduction);
      read_if(c, "min_height", s.cmms.min_height);
      read_if(c, "max_step_jump_deg", s.cmms.max_step_jump_deg);
      if (c.contains("preferred_tool_arm")) s.cmms.preferred_tool_arm = side_from(c["preferred_tool_arm"]);
    }
    if (j.contains("workspace")) {
      const json& w = j["workspace"];
      read_vec_if(w, "lower", s.workspace.lower);
      read_vec_if(w, "upper", s.workspace.upper);
      read_if(w, "spacing", s.workspace.spacing);
      read_vec_if(w, "reference", s.workspace.reference);
      read_if(w, "m_fraction", s.workspace.m_fraction);
      read_if(w, "g_fraction", s.workspace.g_fraction);
      if (w.contains("cable_arm")) s.workspace.cable_arm = side_from(w["cable_arm"]);
      read_if(w, "ik_restarts", s.workspace.ik_restarts);
    }
    read_if(j, "grasp_database", s.grasp_database);
    read_if(j, "seed", s.seed);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

SceneConfig load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read scene file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

GraspDatabase generate_scene_grasps(const SceneConfig& scene) {
  GraspDatabase db;
  db.set(scene.tool.shape.name, generate_grasps(scene.tool.shape, scene.tool_sampler));
  db.set(scene.slider.name, generate_grasps(scene.slider, scene.slider_sampler));
  return db;
}

GraspDatabase scene_grasps(const SceneConfig& scene) {
  GraspDatabase db = scene.grasp_database.empty() ? generate_scene_grasps(scene) : GraspDatabase::load(scene.grasp_database);
  for (const std::string& name : {scene.tool.shape.name, scene.slider.name}) {
    if (!db.contains(name)) throw std::invalid_argument("grasp database has no entry for '" + name + "'");
  }
  return db;
}

}  // namespace tether
