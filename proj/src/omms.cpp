#include "tether/omms.hpp"

#include "tether/workspace.hpp"

#include <algorithm>

namespace tether {

PlanContext::PlanContext(const SceneConfig& s, const GraspDatabase& g)
    : scene(&s), grasps(&g), obstacles(s.obstacles()), cable_obstacles(obstacles) {
  // A cable tied to the table corner lies on the table there.
  if (s.anchor.mode == AnchorMode::table_corner) cable_obstacles.table.reset();
}

void PlanContext::add_box(const OrientedBoxd& box) {
  obstacles.boxes.push_back(box);
  cable_obstacles.boxes.push_back(box);
}

Posed held_object_pose(const ArmModel& arm, const JointVector& q, const GraspCandidate& grasp) {
  return compose(end_effector_pose(arm, q), inverse(grasp.hand_pose_local));
}

CableState tool_cable(const SceneConfig& scene, const Posed& tool_pose, const std::optional<Vector3d>& slider) {
  CableState c;
  c.tool_frame = tool_pose;
  c.tool_tail = tool_pose.apply(scene.tool.tail_local);
  c.anchor = scene.anchor.point();
  c.slider = slider;
  c.tail_frame = scene.tool.tail_frame;
  return c;
}

std::vector<SceneObject> state_objects(const SceneConfig& scene, const PlanState& state) {
  std::vector<SceneObject> objects;
  SceneObject tool{&scene.tool.shape, state.tool_pose, {state.tool_arm}};
  if (state.shared_tool) tool.contact_arms.push_back(other(state.tool_arm));
  objects.push_back(tool);
  if (state.slider_contact() && state.slider_pose) objects.push_back({&scene.slider, *state.slider_pose, {other(state.tool_arm)}});
  return objects;
}

CollisionReport state_collision(const PlanContext& ctx, const PlanState& state) {
  return robot_collision_free(ctx.scene->robot, state.q, state_objects(*ctx.scene, state), ctx.obstacles);
}

CableClearance state_cable_clearance(const PlanContext& ctx, const PlanState& state) {
  const Robot& robot = ctx.scene->robot;
  std::vector<LinkRef> exempt{end_effector_link(robot, state.tool_arm)};
  if (state.slider_contact() || state.shared_tool) exempt.push_back(end_effector_link(robot, other(state.tool_arm)));
  return cable_clear(state.cable, robot, state.q, ctx.cable_obstacles, exempt);
}

void replay_cable(const PlanContext& ctx, MotionSequence& sequence) {
  AccumulationTracker tracker;
  tracker.beta = ctx.scene->tool.beta;
  for (PlanState& s : sequence.states) {
    std::optional<Vector3d> slider;
    if (s.slider_pose) slider = s.slider_pose->translation;
    s.cable = tool_cable(*ctx.scene, s.tool_pose, slider);
    tracker = update_accumulation(tracker, s.cable);
    s.acc_ee = tracker.acc_ee;
    s.acc_tool = tracker.acc_tool;
    const CableClearance c = state_cable_clearance(ctx, s);
    s.cable_clearance = c.min_clearance;
    s.cable_collision = !c.clear;
  }
}

namespace {

// Everything needed to check one arm moving while the other stays put.
struct ArmMotion {
  const PlanContext* ctx;
  ArmSide arm;
  JointVector other_q;
  const GraspCandidate* grasp;   // tool grasp of the moving arm
  std::optional<Posed> static_tool;  // tool pose when it is not carried by the moving arm
  ArmSide static_tool_arm = ArmSide::right;
  bool shared = false;

  PlanState state(const JointVector& q) const {
    PlanState s;
    s.q[index_of(arm)] = q;
    s.q[index_of(other(arm))] = other_q;
    if (static_tool) {
      s.tool_arm = static_tool_arm;
      s.tool_pose = *static_tool;
    } else {
      s.tool_arm = arm;
      s.tool_pose = held_object_pose(ctx->scene->robot.arm(arm), q, *grasp);
      s.tool_grasped = true;
    }
    s.shared_tool = shared;
    return s;
  }

  bool valid(const JointVector& q) const {
    if (!within_limits(ctx->scene->robot.arm(arm), q)) return false;
    return state_collision(*ctx, state(q)).free;
  }
};

std::vector<JointVector> tool_solutions(const PlanContext& ctx, ArmSide arm, const JointVector& other_q,
                                        const GraspCandidate& grasp, const Posed& tool_pose, std::uint64_t seed,
                                        bool shared = false, std::optional<ArmSide> holder = std::nullopt) {
  IkOptions ik;
  ik.restarts = ctx.scene->planner.ik_restarts;
  ik.seed = seed;
  std::vector<JointVector> out;
  for (const JointVector& q : solve_ik(ctx.scene->robot.arm(arm), grasp_world_pose(grasp, tool_pose), ik)) {
    PlanState s;
    s.q[index_of(arm)] = q;
    s.q[index_of(other(arm))] = other_q;
    s.tool_arm = holder.value_or(arm);
    s.tool_pose = tool_pose;
    s.shared_tool = shared;
    if (state_collision(ctx, s).free) out.push_back(q);
  }
  return out;
}

const JointVector& nearest(const std::vector<JointVector>& options, const JointVector& to) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < options.size(); ++i) {
    if (max_joint_delta(options[i], to) < max_joint_delta(options[best], to)) best = i;
  }
  return options[best];
}

RrtOptions rrt_options(const SceneConfig& scene, std::uint64_t seed) {
  RrtOptions o;
  o.step_deg = scene.planner.step_deg;
  o.goal_bias = scene.planner.goal_bias;
  o.max_iterations = scene.planner.max_iterations;
  o.timeout_s = scene.planner.segment_timeout_s;
  o.shortcut_iterations = scene.planner.shortcut_iterations;
  o.seed = seed;
  return o;
}

// Appends the states of `path` (skipping its first configuration when the
// sequence already ends there) with the given phase.
void append_path(MotionSequence& seq, const ArmMotion& motion, const std::vector<JointVector>& path, Phase phase,
                 bool skip_first) {
  for (std::size_t i = skip_first ? 1 : 0; i < path.size(); ++i) {
    PlanState s = motion.state(path[i]);
    s.phase = phase;
    seq.states.push_back(s);
  }
}

struct Chain {
  ArmSide arm;
  std::size_t grasp;
  std::vector<JointVector> configs;   // start, then one per goal
  double cost = 0.0;
};

MotionSequence omms_with(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals, std::uint64_t seed,
                         const std::vector<ArmSide>& arms, std::optional<std::size_t> only_grasp) {
  const SceneConfig& scene = *ctx.scene;
  const Robot& robot = scene.robot;
  const auto& grasps = ctx.tool_grasps();
  std::vector<Posed> poses{start};
  poses.insert(poses.end(), goals.begin(), goals.end());

  std::vector<Chain> chains;
  for (ArmSide arm : arms) {
    const JointVector& other_home = robot.home[index_of(other(arm))];
    for (std::size_t g = 0; g < grasps.size(); ++g) {
      if (only_grasp && g != *only_grasp) continue;
      Chain chain{arm, g, {}, 0.0};
      JointVector prev = robot.home[index_of(arm)];
      bool ok = true;
      for (std::size_t k = 0; k < poses.size() && ok; ++k) {
        const std::uint64_t s = mix_seed(seed, (index_of(arm) * 1000 + g) * 100 + k);
        const auto sols = tool_solutions(ctx, arm, other_home, grasps[g], poses[k], s);
        if (sols.empty()) {
          ok = false;
          break;
        }
        const JointVector& q = nearest(sols, prev);
        chain.cost += max_joint_delta(q, prev);
        chain.configs.push_back(q);
        prev = q;
      }
      if (ok) chains.push_back(std::move(chain));
    }
  }
  if (chains.empty()) throw PlanningError(PlanErrorKind::no_grasp, "no tool grasp is feasible at the start and every goal");
  // Arms in preference order, cheapest chain first within an arm.
  std::stable_sort(chains.begin(), chains.end(), [&](const Chain& a, const Chain& b) {
    if (a.arm != b.arm) return a.arm == arms.front();
    return a.cost < b.cost;
  });

  std::string last_failure;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const Chain& chain = chains[c];
    const JointVector& other_home = robot.home[index_of(other(chain.arm))];
    MotionSequence seq;
    seq.tool_arm = chain.arm;
    seq.tool_grasp = chain.grasp;

    ArmMotion approach{&ctx, chain.arm, other_home, &grasps[chain.grasp], start, chain.arm, false};
    const auto to_grasp = rrt_connect(robot.arm(chain.arm), robot.home[index_of(chain.arm)], chain.configs[0],
                                      [&](const JointVector& q) { return approach.valid(q); },
                                      rrt_options(scene, mix_seed(seed, 7000 + c * 10)));
    if (!to_grasp) {
      last_failure = "approach to the tool";
      continue;
    }
    append_path(seq, approach, *to_grasp, Phase::approach, false);

    ArmMotion carry{&ctx, chain.arm, other_home, &grasps[chain.grasp], std::nullopt, chain.arm, false};
    bool ok = true;
    for (std::size_t k = 1; k < chain.configs.size(); ++k) {
      const auto leg = rrt_connect(robot.arm(chain.arm), chain.configs[k - 1], chain.configs[k],
                                   [&](const JointVector& q) { return carry.valid(q); },
                                   rrt_options(scene, mix_seed(seed, 7000 + c * 10 + k)));
      if (!leg) {
        ok = false;
        last_failure = "transfer to goal " + std::to_string(k);
        break;
      }
      append_path(seq, carry, *leg, Phase::transfer, true);
      if (leg->size() == 1) {
        // Start and goal coincide: the grasp state itself is the placement.
        PlanState s = carry.state(leg->front());
        s.phase = Phase::place;
        seq.states.push_back(s);
      } else {
        seq.states.back().phase = Phase::place;
      }
    }
    if (!ok) continue;
    seq.renumber();
    replay_cable(ctx, seq);
    return seq;
  }
  throw PlanningError(PlanErrorKind::no_path, "RRT budget exhausted on " + last_failure);
}

}  // namespace

MotionSequence plan_omms(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals, std::uint64_t seed,
                         std::optional<ArmSide> tool_arm) {
  const ArmSide preferred = ctx.scene->cmms.preferred_tool_arm;
  if (tool_arm) return omms_with(ctx, start, goals, seed, {*tool_arm}, std::nullopt);
  return omms_with(ctx, start, goals, seed, {preferred, other(preferred)}, std::nullopt);
}

namespace {

// Second half of a handover: `to_exchange` leaves the tool with `first` at the
// exchange pose; the other arm takes it there and visits the goals.
std::optional<MotionSequence> hand_over(const PlanContext& ctx, const MotionSequence& to_exchange, ArmSide first,
                                        const std::vector<Posed>& goals, std::uint64_t seed, std::string& failure) {
  const SceneConfig& scene = *ctx.scene;
  const Robot& robot = scene.robot;
  const auto& grasps = ctx.tool_grasps();
  const Posed& exchange = scene.handover_pose;
  const ArmSide second = other(first);
  const JointVector q_first = to_exchange.states.back().q[index_of(first)];
  const JointVector& home_second = robot.home[index_of(second)];
  const JointVector& home_first = robot.home[index_of(first)];

  // A grasp valid at the exchange (next to the first hand) and at every goal
  // (first arm back home).
  for (std::size_t g = 0; g < grasps.size(); ++g) {
    const std::uint64_t s0 = mix_seed(seed, 9000 + index_of(second) * 100 + g);
    const auto at_exchange = tool_solutions(ctx, second, q_first, grasps[g], exchange, s0, true, first);
    if (at_exchange.empty()) continue;
    std::vector<JointVector> chain{nearest(at_exchange, home_second)};
    bool ok = true;
    for (std::size_t k = 0; k < goals.size() && ok; ++k) {
      const auto sols = tool_solutions(ctx, second, home_first, grasps[g], goals[k], mix_seed(s0, k + 1));
      if (sols.empty()) ok = false;
      else chain.push_back(nearest(sols, chain.back()));
    }
    if (!ok) continue;

    MotionSequence seq = to_exchange;
    for (PlanState& s : seq.states)
      if (s.phase == Phase::place) s.phase = Phase::transfer;

    ArmMotion reach{&ctx, second, q_first, &grasps[g], exchange, first, true};
    const auto approach = rrt_connect(robot.arm(second), home_second, chain.front(),
                                      [&](const JointVector& q) { return reach.valid(q); },
                                      rrt_options(scene, mix_seed(s0, 100)));
    if (!approach) {
      failure = "second arm approach";
      continue;
    }
    append_path(seq, reach, *approach, Phase::approach, true);

    // The first arm lets go and returns home; the tool stays at the exchange.
    ArmMotion retreat{&ctx, first, chain.front(), &grasps[g], exchange, second, true};
    const auto back = rrt_connect(robot.arm(first), q_first, home_first,
                                  [&](const JointVector& q) { return retreat.valid(q); },
                                  rrt_options(scene, mix_seed(s0, 101)));
    if (!back) {
      failure = "first arm retreat";
      continue;
    }
    append_path(seq, retreat, *back, Phase::approach, true);

    ArmMotion carry{&ctx, second, home_first, &grasps[g], std::nullopt, second, false};
    for (std::size_t k = 1; k < chain.size() && ok; ++k) {
      const auto leg = rrt_connect(robot.arm(second), chain[k - 1], chain[k],
                                   [&](const JointVector& q) { return carry.valid(q); },
                                   rrt_options(scene, mix_seed(s0, 200 + k)));
      if (!leg) {
        ok = false;
        failure = "second arm transfer to goal " + std::to_string(k);
        break;
      }
      append_path(seq, carry, *leg, Phase::transfer, true);
      if (leg->size() == 1) {
        PlanState s = carry.state(leg->front());
        s.phase = Phase::place;
        seq.states.push_back(s);
      } else {
        seq.states.back().phase = Phase::place;
      }
    }
    if (!ok) continue;
    seq.tool_arm = second;
    seq.tool_grasp = g;
    return seq;
  }
  return std::nullopt;
}

}  // namespace

MotionSequence plan_handover(const PlanContext& ctx, const Posed& start, const std::vector<Posed>& goals,
                             std::uint64_t seed) {
  const ArmSide preferred = ctx.scene->cmms.preferred_tool_arm;
  std::string failure = "no grasp pair fits at the exchange";
  for (ArmSide first : {preferred, other(preferred)}) {
    for (std::size_t g = 0; g < ctx.tool_grasps().size(); ++g) {
      MotionSequence to_exchange;
      try {
        to_exchange = omms_with(ctx, start, {ctx.scene->handover_pose}, seed, {first}, g);
      } catch (const PlanningError&) {
        continue;
      }
      if (auto seq = hand_over(ctx, to_exchange, first, goals, seed, failure)) {
        seq->renumber();
        replay_cable(ctx, *seq);
        return *seq;
      }
    }
  }
  throw PlanningError(PlanErrorKind::no_path, "handover: " + failure);
}

}  // namespace tether
