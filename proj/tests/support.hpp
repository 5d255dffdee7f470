#pragma once

// Hand-rolled generators and brute-force oracles shared by the tests.

#include "tether/geometry.hpp"

#include <functional>
#include <random>

namespace test {

using tether::Matrix3d;
using tether::Vector3d;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool coin() { return integer(0, 1) == 1; }
  Vector3d point(double half) { return {uniform(-half, half), uniform(-half, half), uniform(-half, half)}; }
  Vector3d unit() {
    std::normal_distribution<double> n;
    Vector3d v(n(rng), n(rng), n(rng));
    return v.normalized();
  }
  Matrix3d rotation() {
    std::normal_distribution<double> n;
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized().toRotationMatrix();
  }
  tether::Posed pose(double half) {
    tether::Posed p;
    p.rotation = rotation();
    p.translation = point(half);
    return p;
  }
};

/// Minimum of a function that is convex on [0,1]^2: a coarse grid, then
/// repeated grid refinement around the best cell.
inline double grid_minimum(const std::function<double(double, double)>& f, int n = 40, int rounds = 6) {
  double best = f(0.0, 0.0);
  double cu = 0.5, cv = 0.5, half = 0.5;
  for (int r = 0; r < rounds; ++r) {
    double bu = cu, bv = cv;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double u = std::clamp(cu - half + 2.0 * half * i / n, 0.0, 1.0);
        const double v = std::clamp(cv - half + 2.0 * half * j / n, 0.0, 1.0);
        const double d = f(u, v);
        if (d < best) {
          best = d;
          bu = u;
          bv = v;
        }
      }
    }
    cu = bu;
    cv = bv;
    half *= 4.0 / n;
  }
  return best;
}

}  // namespace test
