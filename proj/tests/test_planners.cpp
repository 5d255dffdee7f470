#include "support.hpp"
#include "tether/cmms.hpp"

#include <doctest.h>

using namespace tether;

namespace {

struct Fixture {
  SceneConfig scene = default_scene();
  GraspDatabase db = scene_grasps(scene);
};

void check_pose(const Posed& a, const Posed& b, double mm, double deg) {
  const PoseError e = pose_error(a, b);
  CHECK(e.position_mm <= mm);
  CHECK(e.rotation_deg <= deg);
}

// Invariants every planner output shares.
void check_sequence(const PlanContext& ctx, const MotionSequence& seq) {
  REQUIRE_FALSE(seq.states.empty());
  REQUIRE(seq.tool_grasp);
  const GraspCandidate& grasp = ctx.tool_grasps()[*seq.tool_grasp];
  for (std::size_t i = 0; i < seq.states.size(); ++i) {
    const PlanState& s = seq.states[i];
    CHECK(s.step == i);
    const CollisionReport r = state_collision(ctx, s);
    INFO("state " << i << ": " << r.violation);
    CHECK(r.free);
    if (i + 1 < seq.states.size()) {
      for (std::size_t a = 0; a < 2; ++a)
        CHECK(max_joint_delta(s.q[a], seq.states[i + 1].q[a]) <= ctx.scene->planner.step_deg + 1e-9);
    }
    if (s.tool_grasped && !s.shared_tool) {
      const Posed held = held_object_pose(ctx.scene->robot.arm(s.tool_arm), s.q_tool_arm(), grasp);
      CHECK((held.translation - s.tool_pose.translation).norm() <= 1e-6);
      CHECK((held.rotation - s.tool_pose.rotation).cwiseAbs().maxCoeff() <= 1e-6);
    }
    CHECK(s.acc_ee >= 0.0);
  }
}

std::vector<Posed> place_poses(const MotionSequence& seq) {
  std::vector<Posed> out;
  for (const PlanState& s : seq.states)
    if (s.phase == Phase::place) out.push_back(s.tool_pose);
  return out;
}

}  // namespace

TEST_CASE("slider goal projection") {
  const Posed id;
  CHECK((project_slider_goal(id, 200.0, -1000.0) - Vector3d(-200, 0, 0)).norm() < 1e-12);
  const Posed q = Posed::from_translation(10, 20, 1000);
  CHECK((project_slider_goal(q, 200.0, 0.0) - Vector3d(-190, 20, 1000)).norm() < 1e-12);
  const Posed turned{rot_z<double>(90.0), Vector3d(10, 20, 1000)};
  CHECK((project_slider_goal(turned, 200.0, 0.0) - Vector3d(10, -180, 1000)).norm() < 1e-9);
  const Vector3d lifted = project_slider_goal(Posed::from_translation(0, 0, 900), 200.0, 950.0);
  CHECK(lifted.z() == doctest::Approx(950.0));
  CHECK(lifted.x() == doctest::Approx(-200.0));
}

TEST_CASE("omms visits the benchmark goals in order") {
  Fixture f;
  const PlanContext ctx(f.scene, f.db);
  const auto goals = f.scene.benchmark_goals(1);
  const MotionSequence seq = plan_omms(ctx, f.scene.benchmark_start, goals, 7);
  check_sequence(ctx, seq);
  const auto placed = place_poses(seq);
  REQUIRE(placed.size() == goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) check_pose(placed[i], goals[i], 1.0, 0.5);
  // The other arm stays at home.
  for (const PlanState& s : seq.states) CHECK(s.q_cable_arm() == f.scene.robot.home[index_of(other(seq.tool_arm))]);

  const MotionSequence again = plan_omms(ctx, f.scene.benchmark_start, goals, 7);
  REQUIRE(again.states.size() == seq.states.size());
  for (std::size_t i = 0; i < seq.states.size(); ++i) CHECK(again.states[i].q == seq.states[i].q);
}

TEST_CASE("omms with the start as its only goal keeps the tool still") {
  Fixture f;
  const PlanContext ctx(f.scene, f.db);
  const MotionSequence seq = plan_omms(ctx, f.scene.benchmark_start, {f.scene.benchmark_start}, 3);
  check_sequence(ctx, seq);
  for (const PlanState& s : seq.states) {
    check_pose(s.tool_pose, f.scene.benchmark_start, 1.0, 0.5);
    CHECK(s.acc_ee == 0.0);
  }
}

TEST_CASE("omms rejects an unreachable goal") {
  Fixture f;
  const PlanContext ctx(f.scene, f.db);
  Posed high = f.scene.goal_poses[0];
  high.translation.z() = 3000.0;
  try {
    plan_omms(ctx, f.scene.benchmark_start, {high}, 1);
    FAIL("expected a planning error");
  } catch (const PlanningError& e) {
    CHECK(e.kind() == PlanErrorKind::no_grasp);
  }
}

TEST_CASE("cmms follows the omms and stays under the threshold") {
  Fixture f;
  const PlanContext ctx(f.scene, f.db);
  const MotionSequence omms = plan_omms(ctx, f.scene.benchmark_start, f.scene.benchmark_goals(1), 7);
  std::vector<CmmsDiagnostics> diag;
  const MotionSequence cmms = plan_cmms(ctx, omms, f.scene.cmms.alpha_s, f.scene.cmms.acc_threshold, 11, &diag);
  check_sequence(ctx, cmms);
  REQUIRE_FALSE(diag.empty());
  CHECK(diag.size() <= 2);
  CHECK(diag.back().failure.empty());
  for (const PlanState& s : cmms.states) {
    CHECK(s.acc_ee <= f.scene.cmms.acc_threshold + 1e-9);
    if (s.slider_grasped) CHECK(s.cable.slider.has_value());
  }

  // Each OMMS state after the grasp appears once, in order, with the tool
  // arm's joints copied bit for bit; anything between them is a slowed-down
  // state.
  std::size_t g0 = 0;
  while (!omms.states[g0].tool_grasped) ++g0;
  std::vector<const PlanState*> synced;
  for (const PlanState& c : cmms.states)
    if (c.slider_grasped && !c.time_scaled) synced.push_back(&c);
  REQUIRE(synced.size() == omms.states.size() - g0);
  for (std::size_t i = 0; i < synced.size(); ++i) CHECK(synced[i]->q_tool_arm() == omms.states[g0 + i].q_tool_arm());
  for (const PlanState& c : cmms.states)
    if (c.time_scaled) CHECK(c.slider_grasped);

  MotionSequence replayed = omms;
  replay_cable(ctx, replayed);
  double max_o = 0.0, max_c = 0.0;
  for (const auto& s : replayed.states) max_o = std::max(max_o, s.acc_ee);
  for (const auto& s : cmms.states) max_c = std::max(max_c, s.acc_ee);
  CHECK(max_c <= max_o);
}

TEST_CASE("translation-only task: the cable never bends past beta") {
  Fixture f;
  const PlanContext ctx(f.scene, f.db);
  Posed moved = f.scene.benchmark_start;
  moved.translation += Vector3d(-50, 40, 0);
  const MotionSequence omms = plan_omms(ctx, f.scene.benchmark_start, {moved}, 5);
  const MotionSequence cmms = plan_cmms(ctx, omms, f.scene.cmms.alpha_s, f.scene.cmms.acc_threshold, 5);
  for (const PlanState& s : cmms.states) CHECK(s.acc_ee == 0.0);
}

TEST_CASE("filtering marks infeasible slider goals") {
  Fixture f;
  PlanContext ctx(f.scene, f.db);
  const MotionSequence omms = plan_omms(ctx, f.scene.benchmark_start, f.scene.benchmark_goals(1), 7);
  const auto clean = filter_candidates(ctx, omms, f.scene.cmms.alpha_s, f.scene.cmms.acc_threshold);
  REQUIRE(clean.size() == omms.states.size());
  std::size_t kept = 0;
  for (const auto& g : clean) kept += g.status == GoalStatus::kept;
  CHECK(kept > 0);

  // A box swallowing one goal away from where the slider is picked up.
  std::size_t target = clean.size() - 1;
  while (clean[target].status != GoalStatus::kept) --target;
  target = (target + clean.size()) / 2;
  while (clean[target].status != GoalStatus::kept) --target;
  PlanContext boxed(f.scene, f.db);
  boxed.add_box({Posed::from_translation(clean[target].position), Vector3d(40, 40, 40)});
  const auto marked = filter_candidates(boxed, omms, f.scene.cmms.alpha_s, f.scene.cmms.acc_threshold);
  INFO(std::string(to_string(marked[target].status)) << " at " << target);
  CHECK(marked[target].discarded());
  CHECK((marked[target].status == GoalStatus::cable_collision || marked[target].status == GoalStatus::unreachable));

  // Threshold below what the held slider must allow: with the slider goal
  // pushed out of reach every grasped goal is lost.
  SceneConfig low = f.scene;
  low.cmms.min_height = 4000.0;
  const PlanContext unreachable(low, f.db);
  for (const auto& g : filter_candidates(unreachable, omms, low.cmms.alpha_s, low.cmms.acc_threshold))
    if (g.status != GoalStatus::candidate) CHECK(g.status == GoalStatus::unreachable);
}

TEST_CASE("a slider left in place lets the tool yaw build accumulation") {
  Fixture f;
  // Slider left where it was while the tool yaws past beta + 30: replaying
  // that through the tracker must exceed 30 degrees.
  const Posed start = f.scene.benchmark_start;
  const Vector3d slider = project_slider_goal(start, 250.0, 0.0);
  AccumulationTracker t;
  t.beta = f.scene.tool.beta;
  for (int k = 0; k <= 100; ++k) {
    Posed p = start;
    p.rotation = start.rotation * rot_z<double>(-1.0 * k);
    t = update_accumulation(t, tool_cable(f.scene, p, slider));
  }
  CHECK(t.acc_ee > 30.0);
}

TEST_CASE("cmms asks for a new omms when no slider goal works") {
  Fixture f;
  SceneConfig s = f.scene;
  s.cmms.min_height = 4000.0;
  const PlanContext ctx(s, f.db);
  const MotionSequence omms = plan_omms(ctx, s.benchmark_start, s.benchmark_goals(1), 7);
  std::vector<CmmsDiagnostics> diag;
  try {
    plan_cmms(ctx, omms, s.cmms.alpha_s, s.cmms.acc_threshold, 1, &diag);
    FAIL("expected a planning error");
  } catch (const PlanningError& e) {
    CHECK((e.kind() == PlanErrorKind::replan_omms || e.kind() == PlanErrorKind::no_slider_grasp));
  }
  if (diag.size() == 2) CHECK(diag[1].alpha_s == doctest::Approx(diag[0].alpha_s * s.cmms.alpha_reduction));
}

TEST_CASE("handover baseline") {
  Fixture f;
  const PlanContext ctx(f.scene, f.db);
  const auto goals = f.scene.benchmark_goals(1);
  const MotionSequence seq = plan_handover(ctx, f.scene.benchmark_start, goals, 7);
  REQUIRE_FALSE(seq.states.empty());
  bool shared = false, switched = false;
  for (std::size_t i = 0; i < seq.states.size(); ++i) {
    shared = shared || seq.states[i].shared_tool;
    if (i > 0 && seq.states[i].tool_arm != seq.states[i - 1].tool_arm) switched = true;
    CHECK(state_collision(ctx, seq.states[i]).free);
  }
  CHECK(shared);
  CHECK(switched);
  const auto placed = place_poses(seq);
  REQUIRE(placed.size() == goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) check_pose(placed[i], goals[i], 1.0, 0.5);
}
