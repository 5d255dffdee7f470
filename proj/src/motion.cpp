#include "tether/motion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace tether {

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::approach: return "approach";
    case Phase::transfer: return "transfer";
    case Phase::place: return "place";
    case Phase::cable_follow: return "cable-follow";
  }
  return "?";
}

const char* to_string(PlanErrorKind kind) {
  switch (kind) {
    case PlanErrorKind::no_grasp: return "no grasp";
    case PlanErrorKind::no_path: return "no path";
    case PlanErrorKind::no_slider_grasp: return "no slider grasp";
    case PlanErrorKind::replan_omms: return "replan OMMS";
  }
  return "?";
}

PlanningError::PlanningError(PlanErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)), kind_(kind) {}

void MotionSequence::renumber() {
  for (std::size_t i = 0; i < states.size(); ++i) states[i].step = i;
}

std::vector<JointVector> interpolate(const std::vector<JointVector>& path, double max_step_deg) {
  if (path.empty()) throw std::invalid_argument("interpolate: empty path");
  if (max_step_deg <= 0.0) throw std::invalid_argument("interpolate: step must be positive");
  std::vector<JointVector> out{path.front()};
  for (std::size_t i = 1; i < path.size(); ++i) {
    const JointVector& a = path[i - 1];
    const JointVector& b = path[i];
    const int n = std::max(1, static_cast<int>(std::ceil(max_joint_delta(a, b) / max_step_deg - 1e-12)));
    for (int k = 1; k < n; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / n));
    out.push_back(b);
  }
  return out;
}

bool segment_valid(const JointVector& a, const JointVector& b, const StateValidity& valid, double step_deg) {
  const int n = std::max(1, static_cast<int>(std::ceil(max_joint_delta(a, b) / step_deg - 1e-12)));
  for (int k = 0; k <= n; ++k) {
    if (!valid(a + (b - a) * (static_cast<double>(k) / n))) return false;
  }
  return true;
}

namespace {

struct Tree {
  std::vector<JointVector> nodes;
  std::vector<int> parent;

  std::size_t nearest(const JointVector& q) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  std::size_t add(const JointVector& q, std::size_t from) {
    nodes.push_back(q);
    parent.push_back(static_cast<int>(from));
    return nodes.size() - 1;
  }

  std::vector<JointVector> path_to_root(std::size_t i) const {
    std::vector<JointVector> out;
    for (int k = static_cast<int>(i); k >= 0; k = parent[static_cast<std::size_t>(k)]) out.push_back(nodes[static_cast<std::size_t>(k)]);
    return out;
  }
};

// One step from q_near toward target, at most `step` on any joint.
JointVector steer(const JointVector& from, const JointVector& to, double step) {
  const double d = max_joint_delta(from, to);
  if (d <= step) return to;
  return from + (to - from) * (step / d);
}

enum class Extend { reached, advanced, trapped };

Extend extend(Tree& tree, const JointVector& target, const StateValidity& valid, double step, std::size_t& added) {
  const std::size_t near = tree.nearest(target);
  const JointVector q = steer(tree.nodes[near], target, step);
  if (!valid(q)) return Extend::trapped;
  added = tree.add(q, near);
  return max_joint_delta(q, target) < 1e-9 ? Extend::reached : Extend::advanced;
}

}  // namespace

std::optional<std::vector<JointVector>> rrt_connect(const ArmModel& arm, const JointVector& start, const JointVector& goal,
                                                    const StateValidity& valid, const RrtOptions& options) {
  if (!valid(start) || !valid(goal)) return std::nullopt;
  std::mt19937_64 rng(options.seed);
  std::vector<JointVector> path;

  if (segment_valid(start, goal, valid, options.step_deg)) {
    path = {start, goal};
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    Tree a{{start}, {-1}};
    Tree b{{goal}, {-1}};
    bool a_is_start = true;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool found = false;
    for (int it = 0; it < options.max_iterations && !found; ++it) {
      if ((it & 255) == 255 &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > options.timeout_s)
        break;
      JointVector sample(static_cast<Eigen::Index>(arm.dof()));
      if (unit(rng) < options.goal_bias) {
        sample = b.nodes.front();
      } else {
        for (std::size_t j = 0; j < arm.dof(); ++j) {
          const Joint& jt = arm.joints[j];
          sample[static_cast<Eigen::Index>(j)] = jt.min_deg + unit(rng) * (jt.max_deg - jt.min_deg);
        }
      }
      std::size_t new_a = 0;
      if (extend(a, sample, valid, options.step_deg, new_a) != Extend::trapped) {
        const JointVector target = a.nodes[new_a];
        std::size_t new_b = 0;
        Extend e = Extend::advanced;
        while (e == Extend::advanced) e = extend(b, target, valid, options.step_deg, new_b);
        if (e == Extend::reached) {
          std::vector<JointVector> from_a = a.path_to_root(new_a);
          std::vector<JointVector> from_b = b.path_to_root(new_b);
          std::reverse(from_a.begin(), from_a.end());
          from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
          if (!a_is_start) std::reverse(from_a.begin(), from_a.end());
          path = std::move(from_a);
          found = true;
        }
      }
      std::swap(a, b);
      a_is_start = !a_is_start;
    }
    if (!found) return std::nullopt;
  }

  // Shortcut on the densified path; every returned state has been checked.
  std::vector<JointVector> dense = interpolate(path, options.step_deg);
  for (int it = 0; it < options.shortcut_iterations && dense.size() > 2; ++it) {
    std::uniform_int_distribution<std::size_t> pick(0, dense.size() - 1);
    std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (i > j) std::swap(i, j);
    if (j < i + 2) continue;
    if (!segment_valid(dense[i], dense[j], valid, options.step_deg)) continue;
    std::vector<JointVector> bridge = interpolate({dense[i], dense[j]}, options.step_deg);
    std::vector<JointVector> next(dense.begin(), dense.begin() + static_cast<std::ptrdiff_t>(i));
    next.insert(next.end(), bridge.begin(), bridge.end());
    next.insert(next.end(), dense.begin() + static_cast<std::ptrdiff_t>(j) + 1, dense.end());
    dense = std::move(next);
  }
  return dense;
}

}  // namespace tether
