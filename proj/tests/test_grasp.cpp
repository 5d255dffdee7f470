#include "support.hpp"
#include "tether/scene.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace tether;

namespace {

ObjectShape box_shape(const Vector3d& half) {
  Primitive p;
  p.half_extents = half;
  return {"box", {p}};
}

ObjectShape cylinder_shape(double radius, double half_length) {
  Primitive p;
  p.kind = PrimitiveKind::cylinder;
  p.radius = radius;
  p.half_length = half_length;
  return {"cyl", {p}};
}

void check_contact(const ObjectShape& shape, const std::vector<GraspCandidate>& grasps) {
  for (const GraspCandidate& g : grasps) {
    CHECK(g.approach_dir_local().norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(orthonormality_error(g.hand_pose_local.rotation) < 1e-9);
    for (const Vector3d& pad : pad_points(g)) CHECK(std::abs(shape_signed_distance(shape, pad)) <= 1.0);
  }
}

}  // namespace

TEST_CASE("antipodal box grasps") {
  GraspSamplerParams params;
  params.gripper = {0.0, 80.0, 40.0};
  const ObjectShape cube = box_shape(Vector3d(20, 20, 20));
  const auto grasps = generate_grasps(cube, params);
  REQUIRE_FALSE(grasps.empty());
  std::set<int> closing_axes;
  for (const auto& g : grasps) {
    CHECK(g.gripper_width == doctest::Approx(40.0));
    const Vector3d c = g.closing_dir_local().cwiseAbs();
    int axis = 0;
    c.maxCoeff(&axis);
    closing_axes.insert(axis);
  }
  CHECK(closing_axes.size() == 3);
  check_contact(cube, grasps);

  // A 100 mm dimension does not fit; only the two narrow pairs are grasped.
  const ObjectShape bar = box_shape(Vector3d(50, 20, 20));
  for (const auto& g : generate_grasps(bar, params)) CHECK(std::abs(g.closing_dir_local().x()) < 1e-9);
}

TEST_CASE("wide cylinder has no grasps") {
  GraspSamplerParams params;
  params.gripper = {0.0, 80.0, 40.0};
  CHECK(generate_grasps(cylinder_shape(100.0, 50.0), params).empty());
  const auto narrow = generate_grasps(cylinder_shape(15.0, 25.0), params);
  CHECK(narrow.size() == static_cast<std::size_t>(params.approach_count));
  check_contact(cylinder_shape(15.0, 25.0), narrow);
}

TEST_CASE("default tool and slider databases") {
  const SceneConfig scene = default_scene();
  const GraspDatabase db = generate_scene_grasps(scene);
  CHECK(db.at(scene.tool.shape.name).size() >= 8);
  CHECK(db.at(scene.slider.name).size() >= 8);
  check_contact(scene.tool.shape, db.at(scene.tool.shape.name));
  check_contact(scene.slider, db.at(scene.slider.name));
  for (const auto& g : db.at(scene.slider.name)) {
    CHECK(g.gripper_width > scene.gripper.min_width);
    CHECK(g.gripper_width <= scene.gripper.max_width);
  }
  // deterministic
  std::ostringstream a, b;
  db.write(a);
  generate_scene_grasps(scene).write(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("grasp world pose") {
  test::Gen g(41);
  GraspCandidate grasp{g.pose(50.0), 30.0};
  const Posed id;
  CHECK((grasp_world_pose(grasp, id).translation - grasp.hand_pose_local.translation).norm() < 1e-12);
  const Posed shifted = grasp_world_pose(grasp, Posed::from_translation(100.0, 0.0, 0.0));
  CHECK((shifted.translation - grasp.hand_pose_local.translation - Vector3d(100, 0, 0)).norm() < 1e-12);

  // A marker point in the hand frame, carried to the world two ways.
  const Posed turned{rot_z<double>(90.0), Vector3d::Zero()};
  const Vector3d marker(5, -7, 11);
  const Vector3d in_object = grasp.hand_pose_local.apply(marker);
  const Vector3d expected(-in_object.y(), in_object.x(), in_object.z());
  CHECK((grasp_world_pose(grasp, turned).apply(marker) - expected).norm() < 1e-9);

  for (int i = 0; i < 200; ++i) {
    grasp.hand_pose_local = g.pose(50.0);
    const Posed d = g.pose(500.0), o = g.pose(500.0);
    const Posed lhs = grasp_world_pose(grasp, compose(d, o));
    const Posed rhs = compose(d, grasp_world_pose(grasp, o));
    CHECK((lhs.translation - rhs.translation).norm() < 1e-9);
    CHECK((lhs.rotation - rhs.rotation).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("database text round trip") {
  const SceneConfig scene = default_scene();
  const GraspDatabase db = generate_scene_grasps(scene);
  std::stringstream io;
  db.write(io);
  const GraspDatabase back = GraspDatabase::read(io);
  CHECK(back.objects() == db.objects());
  for (const std::string& name : db.objects()) {
    REQUIRE(back.at(name).size() == db.at(name).size());
    for (std::size_t i = 0; i < db.at(name).size(); ++i) {
      CHECK(back.at(name)[i].hand_pose_local.rotation == db.at(name)[i].hand_pose_local.rotation);
      CHECK(back.at(name)[i].hand_pose_local.translation == db.at(name)[i].hand_pose_local.translation);
      CHECK(back.at(name)[i].gripper_width == db.at(name)[i].gripper_width);
    }
  }
  CHECK_THROWS_AS(back.at("nothing"), std::out_of_range);

  std::istringstream short_line("tool 1 0 0 0 1 0 0 0 1 0 0\n");
  CHECK_THROWS_AS(GraspDatabase::read(short_line), std::runtime_error);
  std::istringstream skewed("# comment\n\ntool 2 0 0 0 1 0 0 0 1 0 0 0 40\n");
  CHECK_THROWS_AS(GraspDatabase::read(skewed), std::runtime_error);
}
