#include "pida2c/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pida2c;

namespace {
const ArmGeometry kGeom;
}

TEST(PlanPath, TwoWaypointsAreEndpoints) {
  const auto path = plan_path(kGeom, {0.0, 0.2}, {1.0, 1.2}, 2);
  ASSERT_EQ(path.waypoints.size(), 2u);
  EXPECT_EQ(path.waypoints.front()[0], 0.0);
  EXPECT_EQ(path.waypoints.back()[1], 1.2);
}

TEST(PlanPath, MidpointInterpolation) {
  const auto path = plan_path(kGeom, {0.0, 0.0}, {1.0, 1.0}, 3);
  ASSERT_EQ(path.waypoints.size(), 3u);
  EXPECT_DOUBLE_EQ(path.waypoints[1][0], 0.5);
  EXPECT_DOUBLE_EQ(path.waypoints[1][1], 0.5);
}

TEST(PlanPath, DegeneratePathRepeatsPoint) {
  const auto path = plan_path(kGeom, {0.4, 0.9}, {0.4, 0.9}, 5);
  for (const auto& q : path.waypoints) {
    EXPECT_EQ(q[0], 0.4);
    EXPECT_EQ(q[1], 0.9);
  }
}

TEST(PlanPath, RejectsEndpointsOutsideLimits) {
  EXPECT_THROW(plan_path(kGeom, {0.0, -0.5}, {1.0, 1.0}, 2),
               LimitViolationError);
  EXPECT_THROW(plan_path(kGeom, {0.0, 0.0}, {4.0, 1.0}, 2),
               LimitViolationError);
}

TEST(Parameterize, TrapezoidPhases) {
  // 1.5 rad at v_max 1.5, a_max 3: 0.5 s accel + 0.5 s cruise + 0.5 s decel
  const auto path = plan_path(kGeom, {0.0, 0.0}, {1.5, 0.3}, 2);
  const auto traj = parameterize(path, 1.5, 3.0);
  EXPECT_NEAR(traj.duration, 1.5, 1e-12);
  EXPECT_NEAR(traj.t_accel, 0.5, 1e-12);
  EXPECT_NEAR(traj.t_cruise, 0.5, 1e-12);
  EXPECT_NEAR(traj.v_peak, 1.5, 1e-12);
}

TEST(Parameterize, ZeroDisplacement) {
  const auto path = plan_path(kGeom, {0.7, 0.7}, {0.7, 0.7}, 2);
  const auto traj = parameterize(path, 1.5, 3.0);
  EXPECT_EQ(traj.duration, 0.0);
  const auto s = sample(traj, 0.0);
  EXPECT_EQ(s.q[0], 0.7);
  EXPECT_EQ(s.qd[0], 0.0);
}

TEST(Parameterize, TriangularWhenCruiseUnreachable) {
  const auto path = plan_path(kGeom, {0.0, 0.0}, {0.3, 0.0}, 2);
  const auto traj = parameterize(path, 1.5, 3.0);
  EXPECT_NEAR(traj.duration, 2.0 * std::sqrt(0.1), 1e-12);
  EXPECT_NEAR(traj.v_peak, std::sqrt(0.9), 1e-12);
  EXPECT_EQ(traj.t_cruise, 0.0);
}

TEST(Sample, EndpointsAtRest) {
  const auto traj =
      parameterize(plan_path(kGeom, {0.1, 0.2}, {-1.0, 1.4}, 2), 1.5, 3.0);
  const auto a = sample(traj, 0.0);
  EXPECT_EQ(a.q[0], 0.1);
  EXPECT_EQ(a.q[1], 0.2);
  EXPECT_EQ(a.qd[0], 0.0);
  const auto b = sample(traj, traj.duration);
  EXPECT_EQ(b.q[0], -1.0);
  EXPECT_EQ(b.q[1], 1.4);
  EXPECT_EQ(b.qd[1], 0.0);
  const auto c = sample(traj, traj.duration + 5.0);  // hold
  EXPECT_EQ(c.q[0], -1.0);
  EXPECT_EQ(c.qd[0], 0.0);
}

TEST(Sample, MidCruiseRunsAtVmax) {
  const auto traj =
      parameterize(plan_path(kGeom, {0.0, 0.0}, {1.5, 0.3}, 2), 1.5, 3.0);
  const auto mid = sample(traj, 0.75);
  EXPECT_NEAR(std::abs(mid.qd[0]), 1.5, 1e-12);  // dominant joint
}

TEST(Sample, RespectsLimitsEveryMillisecond) {
  const auto traj =
      parameterize(plan_path(kGeom, {0.3, 0.1}, {-1.4, 1.9}, 2), 1.5, 3.0);
  const double dt = 1e-3;
  TrajectorySample prev = sample(traj, 0.0);
  for (double t = dt; t <= traj.duration + 0.1; t += dt) {
    const auto s = sample(traj, t);
    for (int j = 0; j < kNumJoints; ++j) {
      ASSERT_LE(std::abs(s.qd[j]), 1.5 + 1e-9);
      ASSERT_LE(std::abs(s.qd[j] - prev.qd[j]) / dt, 3.0 + 1e-6);
    }
    prev = s;
  }
}

TEST(Sample, MonotonePositionProgress) {
  const auto traj =
      parameterize(plan_path(kGeom, {0.5, 1.8}, {-0.9, 0.2}, 2), 1.5, 3.0);
  TrajectorySample prev = sample(traj, 0.0);
  for (double t = 1e-3; t <= traj.duration + 0.05; t += 1e-3) {
    const auto s = sample(traj, t);
    for (int j = 0; j < kNumJoints; ++j) {
      const double direction = traj.delta[j] >= 0.0 ? 1.0 : -1.0;
      ASSERT_GE(direction * (s.q[j] - prev.q[j]), -1e-12);
    }
    prev = s;
  }
}

TEST(Sample, VelocityIntegratesToDisplacement) {
  const auto traj =
      parameterize(plan_path(kGeom, {0.2, 0.4}, {-1.1, 1.7}, 2), 1.5, 3.0);
  const double dt = 1e-4;
  JointVec integral{0.0, 0.0};
  TrajectorySample prev = sample(traj, 0.0);
  for (double t = dt; t <= traj.duration + 1e-12; t += dt) {
    const auto s = sample(traj, t);
    for (int j = 0; j < kNumJoints; ++j)
      integral[j] += 0.5 * (prev.qd[j] + s.qd[j]) * dt;
    prev = s;
  }
  for (int j = 0; j < kNumJoints; ++j) {
    EXPECT_NEAR(integral[j], traj.delta[j], 1e-6);
  }
}

TEST(Sample, BothJointsArriveTogether) {
  const auto traj =
      parameterize(plan_path(kGeom, {0.0, 0.1}, {1.2, 0.4}, 2), 1.5, 3.0);
  const auto near_end = sample(traj, traj.duration - 0.05);
  EXPECT_NE(near_end.q[0], traj.goal[0]);
  EXPECT_NE(near_end.q[1], traj.goal[1]);
  const auto end = sample(traj, traj.duration);
  EXPECT_EQ(end.q[0], traj.goal[0]);
  EXPECT_EQ(end.q[1], traj.goal[1]);
}

TEST(Parameterize, RejectsNonPositiveLimits) {
  const auto path = plan_path(kGeom, {0.0, 0.0}, {1.0, 1.0}, 2);
  EXPECT_THROW(parameterize(path, 0.0, 3.0), std::invalid_argument);
  EXPECT_THROW(parameterize(path, 1.5, -1.0), std::invalid_argument);
}
