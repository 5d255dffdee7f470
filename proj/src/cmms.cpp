#include "tether/cmms.hpp"

#include "tether/workspace.hpp"

#include <algorithm>
#include <cmath>

namespace tether {

const char* to_string(GoalStatus status) {
  switch (status) {
    case GoalStatus::candidate: return "candidate";
    case GoalStatus::kept: return "kept";
    case GoalStatus::unreachable: return "unreachable";
    case GoalStatus::cable_collision: return "cable-collision";
    case GoalStatus::accumulation: return "accumulation";
  }
  return "?";
}

Vector3d project_slider_goal(const Posed& tool_pose, double alpha_s, double min_height, const Vector3d& tail_direction_local) {
  Vector3d p = tool_pose.rotation * (alpha_s * tail_direction_local) + tool_pose.translation;
  p.z() += std::max(0.0, min_height - p.z());
  return p;
}

std::vector<SliderGoal> slider_goals(const MotionSequence& omms, double alpha_s, double min_height,
                                     const Vector3d& tail_direction_local) {
  std::vector<SliderGoal> goals;
  goals.reserve(omms.states.size());
  for (const PlanState& s : omms.states)
    goals.push_back({project_slider_goal(s.tool_pose, alpha_s, min_height, tail_direction_local), s.step, alpha_s, GoalStatus::candidate});
  return goals;
}

Vector3d slider_rest_position(const SceneConfig& scene, const Posed& tool_pose, double alpha_s) {
  const CableState cable = tool_cable(scene, tool_pose, std::nullopt);
  const Vector3d along = cable.anchor - cable.tool_tail;
  const double length = along.norm();
  const double wanted = alpha_s - scene.tool.tail_local.norm();
  const double d = std::clamp(wanted, std::min(10.0, 0.5 * length), std::max(0.0, length - 10.0));
  return cable.tool_tail + (d / length) * along;
}

namespace {

struct Follow {
  bool ok = false;
  std::vector<SliderGoal> goals;
  std::vector<JointVector> cable_q;   // one per OMMS state from the grasp index on
  std::string failure;
};

class CmmsBuilder {
 public:
  CmmsBuilder(const PlanContext& ctx, const MotionSequence& omms, double rest_alpha)
      : ctx_(ctx), scene_(*ctx.scene), omms_(omms), tool_arm_(omms.tool_arm), cable_arm_(other(omms.tool_arm)) {
    grasp_index_ = omms.states.size();
    for (std::size_t i = 0; i < omms.states.size(); ++i) {
      if (omms.states[i].tool_grasped) {
        grasp_index_ = i;
        break;
      }
    }
    if (grasp_index_ == 0 || grasp_index_ >= omms.states.size())
      throw std::invalid_argument("OMMS has no approach followed by a grasped state");
    const PlanState& before = omms.states[grasp_index_ - 1];
    rest_.rotation = scene_.slider_rotation;
    rest_.translation = slider_rest_position(scene_, before.tool_pose, rest_alpha);
  }

  std::size_t grasp_index() const { return grasp_index_; }
  const Posed& rest() const { return rest_; }
  const ArmModel& cable_model() const { return scene_.robot.arm(cable_arm_); }

  // A state of the sequence before the slider is grasped.
  PlanState resting(const PlanState& base, const JointVector& q_cable) const {
    PlanState s = base;
    s.q[index_of(cable_arm_)] = q_cable;
    s.slider_pose = rest_;
    s.slider_grasped = false;
    s.cable = tool_cable(scene_, s.tool_pose, rest_.translation);
    return s;
  }

  // OMMS state `i` with the cable arm at `q` holding the slider.
  PlanState holding(std::size_t i, const JointVector& q, const GraspCandidate& grasp) const {
    PlanState s = omms_.states[i];
    s.q[index_of(cable_arm_)] = q;
    s.slider_pose = held_object_pose(cable_model(), q, grasp);
    s.slider_grasped = true;
    s.cable = tool_cable(scene_, s.tool_pose, s.slider_pose->translation);
    return s;
  }

  // A state a fraction `t` of the way from `a` to `b` (both arms
  // interpolated), with the tool and slider carried by the hands.
  PlanState between(const PlanState& a, const PlanState& b, double t, const GraspCandidate& slider_grasp) const {
    PlanState s = b;
    for (std::size_t arm = 0; arm < 2; ++arm) s.q[arm] = a.q[arm] + (b.q[arm] - a.q[arm]) * t;
    if (b.tool_grasped && omms_.tool_grasp)
      s.tool_pose = held_object_pose(scene_.robot.arm(tool_arm_), s.q_tool_arm(), ctx_.tool_grasps()[*omms_.tool_grasp]);
    s.slider_pose = held_object_pose(cable_model(), s.q_cable_arm(), slider_grasp);
    s.cable = tool_cable(scene_, s.tool_pose, s.slider_pose->translation);
    s.phase = Phase::cable_follow;
    s.time_scaled = true;
    return s;
  }

  enum class Check { ok, robot, cable };

  Check check(const PlanState& s) const {
    if (!within_limits(scene_.robot.arm(cable_arm_), s.q[index_of(cable_arm_)])) return Check::robot;
    if (!state_collision(ctx_, s).free) return Check::robot;
    if (!state_cable_clearance(ctx_, s).clear) return Check::cable;
    return Check::ok;
  }

  AccumulationTracker tracker_before_grasp() const {
    AccumulationTracker t;
    t.beta = scene_.tool.beta;
    for (std::size_t i = 0; i < grasp_index_; ++i) t = update_accumulation(t, resting(omms_.states[i], scene_.robot.home[index_of(cable_arm_)]).cable);
    return t;
  }

  // Slider grasps with their best configuration at the rest pose, most
  // manipulable first.
  std::vector<std::pair<std::size_t, JointVector>> slider_grasp_order(std::uint64_t seed) const {
    const auto& grasps = ctx_.slider_grasps();
    const PlanState& base = omms_.states[grasp_index_ - 1];
    std::vector<std::tuple<double, std::size_t, JointVector>> scored;
    IkOptions ik;
    ik.restarts = scene_.planner.ik_restarts;
    for (std::size_t g = 0; g < grasps.size(); ++g) {
      ik.seed = mix_seed(seed, 500 + g);
      double best = -1.0;
      JointVector best_q;
      for (const JointVector& q : solve_ik(cable_model(), grasp_world_pose(grasps[g], rest_), ik)) {
        PlanState s = resting(base, q);
        s.slider_reach = true;
        if (check(s) != Check::ok) continue;
        const double m = manipulability(cable_model(), q);
        if (m > best) {
          best = m;
          best_q = q;
        }
      }
      if (best >= 0.0) scored.emplace_back(best, g, best_q);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
    std::vector<std::pair<std::size_t, JointVector>> out;
    for (auto& [m, g, q] : scored) out.emplace_back(g, q);
    return out;
  }

  std::optional<std::vector<JointVector>> approach_slider(const JointVector& q_rest, std::uint64_t seed) const {
    const PlanState& base = omms_.states[grasp_index_ - 1];
    auto valid = [&](const JointVector& q) {
      PlanState s = resting(base, q);
      s.slider_reach = true;
      return check(s) == Check::ok;
    };
    RrtOptions o;
    o.step_deg = scene_.planner.step_deg;
    o.goal_bias = scene_.planner.goal_bias;
    o.max_iterations = scene_.planner.max_iterations;
    o.timeout_s = scene_.planner.segment_timeout_s;
    o.shortcut_iterations = scene_.planner.shortcut_iterations;
    o.seed = seed;
    return rrt_connect(cable_model(), scene_.robot.home[index_of(cable_arm_)], q_rest, valid, o);
  }

  Follow follow(const GraspCandidate& grasp, const JointVector& q_rest, double alpha_s, double threshold,
                std::uint64_t seed) const {
    Follow f;
    f.goals = slider_goals(omms_, alpha_s, scene_.cmms.min_height, scene_.tool.tail_frame.reference);
    const std::size_t n = omms_.states.size();

    AccumulationTracker tracker = tracker_before_grasp();
    std::size_t k = grasp_index_ - 1;   // last committed step
    JointVector q_k = q_rest;

    IkOptions ik;
    ik.restarts = scene_.planner.ik_restarts;

    for (std::size_t i = grasp_index_; i < n; ++i) {
      SliderGoal& goal = f.goals[i];
      // Joint change allowed per state of the sequence.
      const double budget = scene_.cmms.max_step_jump_deg * static_cast<double>(i - k);
      Posed slider_pose;
      slider_pose.rotation = scene_.slider_rotation;
      slider_pose.translation = goal.position;
      const Posed target = grasp_world_pose(grasp, slider_pose);

      std::optional<JointVector> q_i = solve_ik_from(cable_model(), target, q_k, ik);
      if (q_i && max_joint_delta(*q_i, q_k) > budget) q_i.reset();
      if (!q_i) {
        ik.seed = mix_seed(seed, i);
        for (const JointVector& q : solve_ik(cable_model(), target, ik)) {
          const double d = max_joint_delta(q, q_k);
          if (d <= budget && (!q_i || d < max_joint_delta(*q_i, q_k))) q_i = q;
        }
      }
      if (!q_i) {
        goal.status = GoalStatus::unreachable;
        continue;
      }
      const PlanState at_goal = holding(i, *q_i, grasp);
      const Check c = check(at_goal);
      if (c != Check::ok) {
        goal.status = c == Check::cable ? GoalStatus::cable_collision : GoalStatus::unreachable;
        continue;
      }

      auto bridge = bridge_states(k, q_k, i, *q_i, grasp, tracker, threshold, seed);
      if (bridge.status != GoalStatus::kept) {
        goal.status = bridge.status;
        continue;
      }
      goal.status = GoalStatus::kept;
      f.cable_q.insert(f.cable_q.end(), bridge.configs.begin(), bridge.configs.end());
      tracker = bridge.tracker;
      k = i;
      q_k = *q_i;
    }

    // Hold the last kept configuration to the end.
    for (std::size_t s = k + 1; s < n; ++s) {
      const PlanState st = holding(s, q_k, grasp);
      const Check c = check(st);
      tracker = update_accumulation(tracker, st.cable);
      if (c != Check::ok || tracker.acc_ee > threshold) {
        f.failure = "no admissible slider goal after step " + std::to_string(k) + "; holding fails at step " +
                    std::to_string(s) + (c == Check::robot ? " (robot collision)" : c == Check::cable ? " (cable collision)" : " (accumulation)");
        return f;
      }
      f.cable_q.push_back(q_k);
    }
    f.ok = true;
    return f;
  }

 private:
  struct Bridge {
    GoalStatus status = GoalStatus::kept;
    std::vector<JointVector> configs;   // steps k+1 .. i
    AccumulationTracker tracker;
  };

  // Cable-arm configurations for steps k+1..i ending at q_i: straight joint
  // interpolation first, an RRT valid against every tool state of the gap
  // when that collides.
  Bridge bridge_states(std::size_t k, const JointVector& q_k, std::size_t i, const JointVector& q_i,
                       const GraspCandidate& grasp, const AccumulationTracker& start, double threshold,
                       std::uint64_t seed) const {
    const std::size_t gap = i - k;
    std::vector<JointVector> configs;
    for (std::size_t s = 1; s <= gap; ++s) configs.push_back(q_k + (q_i - q_k) * (static_cast<double>(s) / gap));
    Bridge b = evaluate(k, configs, grasp, start, threshold);
    if (b.status == GoalStatus::kept || b.status == GoalStatus::accumulation || gap < 2) return b;

    auto valid = [&](const JointVector& q) {
      for (std::size_t s = k + 1; s <= i; ++s) {
        if (check(holding(s, q, grasp)) != Check::ok) return false;
      }
      return true;
    };
    RrtOptions o;
    o.step_deg = scene_.planner.step_deg;
    o.goal_bias = scene_.planner.goal_bias;
    o.max_iterations = 300;
    o.timeout_s = scene_.planner.segment_timeout_s;
    o.shortcut_iterations = scene_.planner.shortcut_iterations;
    o.seed = mix_seed(seed, 100000 + i);
    const auto path = rrt_connect(cable_model(), q_k, q_i, valid, o);
    if (!path || path->size() - 1 > gap) return b;
    std::vector<JointVector> resampled;
    for (std::size_t s = 1; s <= gap; ++s) {
      const std::size_t idx = static_cast<std::size_t>(std::lround(static_cast<double>(s) * (path->size() - 1) / gap));
      resampled.push_back((*path)[idx]);
    }
    Bridge r = evaluate(k, resampled, grasp, start, threshold);
    return r.status == GoalStatus::kept ? r : b;
  }

  Bridge evaluate(std::size_t k, const std::vector<JointVector>& configs, const GraspCandidate& grasp,
                  const AccumulationTracker& start, double threshold) const {
    Bridge b;
    b.tracker = start;
    b.configs = configs;
    for (std::size_t s = 0; s < configs.size(); ++s) {
      const PlanState st = holding(k + 1 + s, configs[s], grasp);
      const Check c = check(st);
      if (c != Check::ok) {
        b.status = c == Check::cable ? GoalStatus::cable_collision : GoalStatus::unreachable;
        return b;
      }
      b.tracker = update_accumulation(b.tracker, st.cable);
      if (b.tracker.acc_ee > threshold) {
        b.status = GoalStatus::accumulation;
        return b;
      }
    }
    return b;
  }

  const PlanContext& ctx_;
  const SceneConfig& scene_;
  const MotionSequence& omms_;
  ArmSide tool_arm_;
  ArmSide cable_arm_;
  std::size_t grasp_index_ = 0;
  Posed rest_;
};

struct Attempt {
  Follow follow;
  std::size_t slider_grasp = 0;
  std::vector<JointVector> approach;
};

Attempt try_alpha(const CmmsBuilder& builder, const PlanContext& ctx, double alpha_s, double threshold,
                  std::uint64_t seed, bool& any_grasp) {
  Attempt last;
  last.follow.failure = "no slider grasp is feasible at the rest position";
  const auto order = builder.slider_grasp_order(seed);
  any_grasp = any_grasp || !order.empty();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& [g, q_rest] = order[r];
    const auto approach = builder.approach_slider(q_rest, mix_seed(seed, 600 + r));
    if (!approach) {
      last.follow.failure = "no path to the slider";
      continue;
    }
    Attempt a;
    a.slider_grasp = g;
    a.approach = *approach;
    a.follow = builder.follow(ctx.slider_grasps()[g], q_rest, alpha_s, threshold, mix_seed(seed, 700 + r));
    if (a.follow.ok) return a;
    last = std::move(a);
  }
  return last;
}

}  // namespace

std::vector<SliderGoal> filter_candidates(const PlanContext& ctx, const MotionSequence& omms, double alpha_s,
                                          double acc_threshold) {
  CmmsBuilder builder(ctx, omms, alpha_s);
  bool any = false;
  Attempt a = try_alpha(builder, ctx, alpha_s, acc_threshold, ctx.scene->seed, any);
  if (a.follow.goals.empty()) a.follow.goals = slider_goals(omms, alpha_s, ctx.scene->cmms.min_height, ctx.scene->tool.tail_frame.reference);
  return a.follow.goals;
}

MotionSequence plan_cmms(const PlanContext& ctx, const MotionSequence& omms, double alpha_s, double acc_threshold,
                         std::uint64_t seed, std::vector<CmmsDiagnostics>* diagnostics) {
  if (alpha_s <= 0.0) throw std::invalid_argument("alpha_s must be positive");
  const SceneConfig& scene = *ctx.scene;
  CmmsBuilder builder(ctx, omms, alpha_s);
  const ArmSide cable_arm = other(omms.tool_arm);
  bool any_grasp = false;
  std::string failures;

  for (int round = 0; round < 2; ++round) {
    const double alpha = round == 0 ? alpha_s : alpha_s * scene.cmms.alpha_reduction;
    Attempt a = try_alpha(builder, ctx, alpha, acc_threshold, mix_seed(seed, static_cast<std::uint64_t>(round)), any_grasp);
    if (diagnostics) diagnostics->push_back({alpha, a.follow.goals, a.follow.ok ? "" : a.follow.failure});
    if (!any_grasp) throw PlanningError(PlanErrorKind::no_slider_grasp, "no slider grasp is feasible at the rest position");
    if (!a.follow.ok) {
      failures += (failures.empty() ? "" : "; ") + std::string("alpha_s ") + std::to_string(alpha) + ": " + a.follow.failure;
      continue;
    }

    MotionSequence seq;
    seq.tool_arm = omms.tool_arm;
    seq.tool_grasp = omms.tool_grasp;
    seq.slider_grasp = a.slider_grasp;
    const std::size_t g0 = builder.grasp_index();
    const JointVector& home = scene.robot.home[index_of(cable_arm)];
    for (std::size_t i = 0; i < g0; ++i) seq.states.push_back(builder.resting(omms.states[i], home));
    const PlanState grasp_base = omms.states[g0 - 1];
    for (std::size_t i = 1; i < a.approach.size(); ++i) {
      PlanState s = builder.resting(grasp_base, a.approach[i]);
      s.phase = Phase::approach;
      s.slider_reach = true;
      seq.states.push_back(s);
    }
    const GraspCandidate& sg = ctx.slider_grasps()[a.slider_grasp];
    const double step = scene.planner.step_deg;
    std::string scaling_failure;
    for (std::size_t i = g0; i < omms.states.size() && scaling_failure.empty(); ++i) {
      PlanState s = builder.holding(i, a.follow.cable_q[i - g0], sg);
      if (s.phase != Phase::place) s.phase = Phase::cable_follow;
      // Slow the tool arm down where the cable arm has further to go.
      const PlanState prev = seq.states.back();
      const int pieces = static_cast<int>(std::ceil(max_joint_delta(prev.q_cable_arm(), s.q_cable_arm()) / step - 1e-9));
      for (int p = 1; p < pieces; ++p) {
        PlanState mid = builder.between(prev, s, static_cast<double>(p) / pieces, sg);
        if (builder.check(mid) != CmmsBuilder::Check::ok) {
          scaling_failure = "slowed-down state before step " + std::to_string(i) + " collides";
          break;
        }
        seq.states.push_back(std::move(mid));
      }
      seq.states.push_back(s);
    }
    if (!scaling_failure.empty()) {
      failures += (failures.empty() ? "" : "; ") + scaling_failure;
      continue;
    }
    seq.renumber();
    replay_cable(ctx, seq);

    double worst = 0.0;
    for (const PlanState& s : seq.states) worst = std::max(worst, s.acc_ee);
    if (worst > acc_threshold + 1e-9) {
      failures += "; replayed accumulation " + std::to_string(worst) + " exceeds the threshold";
      continue;
    }
    return seq;
  }
  throw PlanningError(PlanErrorKind::replan_omms, failures);
}

}  // namespace tether
