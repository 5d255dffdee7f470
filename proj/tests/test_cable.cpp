#include "cable_oracle.hpp"

#include <doctest.h>

using namespace tether;

namespace {

CableState planar(double phi) { return test::cable_at(Posed{}, phi, 0.0, 500.0); }

}  // namespace

TEST_CASE("bending angle and quadrant") {
  BendingAngle b = bending_angle(planar(0.0));
  CHECK(b.degrees == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.quadrant == 1);
  b = bending_angle(planar(45.0));
  CHECK(b.degrees == doctest::Approx(45.0));
  CHECK(b.quadrant == 1);
  b = bending_angle(planar(135.0));
  CHECK(b.degrees == doctest::Approx(135.0));
  CHECK(b.quadrant == 2);
  b = bending_angle(planar(-135.0));
  CHECK(b.degrees == doctest::Approx(135.0));
  CHECK(b.quadrant == 3);
  b = bending_angle(planar(-30.0));
  CHECK(b.degrees == doctest::Approx(30.0));
  CHECK(b.quadrant == 4);
  CHECK_FALSE(b.indeterminate);

  // The default reference is tool -x; +90 deg counter-clockwise about tool z is -y.
  CableState s;
  s.tool_tail = Vector3d(10, 20, 30);
  s.anchor = s.tool_tail + Vector3d(0, -300, 0);
  b = bending_angle(s);
  CHECK(b.degrees == doctest::Approx(90.0));
  CHECK(b.quadrant == 2);

  s.anchor = s.tool_tail + Vector3d(0, 0, 300);
  CHECK(bending_angle(s).indeterminate);
}

TEST_CASE("bending is measured in the tool frame") {
  test::Gen g(31);
  for (int i = 0; i < 200; ++i) {
    const double phi = g.uniform(-179.0, 179.0);
    const CableState s = test::cable_at(g.pose(300.0), phi, g.uniform(-1.0, 1.0), 400.0);
    CHECK(bending_angle(s).degrees == doctest::Approx(std::abs(phi)).epsilon(1e-9));
  }
}

TEST_CASE("cable segments") {
  CableState s;
  s.tool_tail = Vector3d(0, 0, 900);
  s.anchor = Vector3d(0, 0, 1800);
  auto segs = cable_segments(s);
  REQUIRE(segs.size() == 1);
  CHECK((segs[0].b - segs[0].a).normalized().z() == doctest::Approx(1.0));
  s.slider = Vector3d(100, 0, 1000);
  segs = cable_segments(s);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].b == segs[1].a);
  CHECK_NOTHROW(validate_cable(s));
  s.slider = s.tool_tail + Vector3d(0.5, 0, 0);
  CHECK_THROWS_AS(validate_cable(s), std::invalid_argument);
}

TEST_CASE("monotone counter-clockwise sweep ends at theta minus beta") {
  for (double theta : {61.0, 90.0, 170.0}) {
    AccumulationTracker t;
    const int n = 1000;
    for (int k = 0; k <= n; ++k) t = update_accumulation(t, planar(theta * k / n));
    CHECK(std::abs(t.acc_ee - (theta - t.beta)) < 1e-9);
    CHECK(t.acc_tool == 0.0);
  }
}

TEST_CASE("trajectories below beta never accumulate") {
  test::Gen g(32);
  for (int i = 0; i < 100; ++i) {
    AccumulationTracker t;
    for (int k = 0; k < 200; ++k) {
      t = update_accumulation(t, planar(g.uniform(-59.0, 59.0)));
      CHECK(t.acc_ee == 0.0);
    }
  }
}

TEST_CASE("rise past beta and back") {
  AccumulationTracker t;
  for (int k = 0; k <= 90; ++k) t = update_accumulation(t, planar(k));
  CHECK(t.acc_ee == doctest::Approx(30.0));
  CHECK(t.engaged_ee);
  for (int k = 89; k >= 50; --k) t = update_accumulation(t, planar(k));
  CHECK(t.acc_ee == 0.0);
  CHECK_FALSE(t.engaged_ee);
}

TEST_CASE("clockwise past 90 degrees accumulates around the tool") {
  AccumulationTracker t;
  for (int k = 0; k <= 120; ++k) t = update_accumulation(t, planar(-k));
  CHECK(t.acc_tool == doctest::Approx(30.0));
  CHECK(t.acc_ee == 0.0);
}

TEST_CASE("idle updates change nothing") {
  test::Gen g(33);
  for (int i = 0; i < 50; ++i) {
    const auto traj = test::random_trajectory(g, 100, 4.9);
    AccumulationTracker t = test::primed_tracker(traj.states[0], 60.0);
    for (const auto& s : traj.states) t = update_accumulation(t, s);
    const AccumulationTracker held = t;
    for (int k = 0; k < 10; ++k) t = update_accumulation(t, traj.states.back());
    CHECK(t.acc_ee == held.acc_ee);
    CHECK(t.acc_tool == held.acc_tool);
  }
}

TEST_CASE("tracker matches the unwrapped-angle integrator") {
  test::Gen g(34);
  double worst = 0.0;
  int engaged = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto traj = test::random_trajectory(g, 300, 4.99);
    const auto oracle = test::integrate(traj.phi, 60.0, 90.0);
    AccumulationTracker t = test::primed_tracker(traj.states[0], 60.0);
    bool any = false;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
      t = update_accumulation(t, traj.states[k]);
      CHECK(t.acc_ee >= 0.0);
      CHECK(t.acc_tool >= 0.0);
      worst = std::max({worst, std::abs(t.acc_ee - oracle[k].acc_ee), std::abs(t.acc_tool - oracle[k].acc_tool)});
      any = any || t.acc_ee > 0.0 || t.acc_tool > 0.0;
    }
    engaged += any;
  }
  MESSAGE("worst difference " << worst << " deg, " << engaged << " trajectories accumulated");
  CHECK(worst <= 1e-6);
  CHECK(engaged > 100);
}

TEST_CASE("signed sweep across the reference line") {
  CHECK(signed_sweep(2.0, 1, 3.0, 4) == doctest::Approx(-5.0));
  CHECK(signed_sweep(3.0, 4, 2.0, 1) == doctest::Approx(5.0));
  CHECK(signed_sweep(178.0, 2, 177.0, 3) == doctest::Approx(5.0));
  CHECK(signed_sweep(177.0, 3, 178.0, 2) == doctest::Approx(-5.0));
  CHECK(signed_sweep(100.0, 3, 110.0, 3) == doctest::Approx(-10.0));
}
