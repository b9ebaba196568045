#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pida2c/common.hpp"
#include "pida2c/errors.hpp"
#include "pida2c/plant.hpp"

namespace pida2c {

// Kinematic path: ordered joint-space waypoints from start to goal.
struct Path {
  std::vector<JointVec> waypoints;
};

inline Path plan_path(const ArmGeometry& g, const JointVec& start,
                      const JointVec& goal, int n_waypoints) {
  if (n_waypoints < 2)
    throw std::invalid_argument("plan_path: need at least 2 waypoints");
  for (int j = 0; j < kNumJoints; ++j) {
    if (start[j] < g.q_min[j] || start[j] > g.q_max[j] || goal[j] < g.q_min[j] ||
        goal[j] > g.q_max[j]) {
      throw LimitViolationError("plan_path: endpoint outside joint limits");
    }
  }
  Path path;
  path.waypoints.reserve(static_cast<std::size_t>(n_waypoints));
  for (int i = 0; i < n_waypoints; ++i) {
    const double f = static_cast<double>(i) / (n_waypoints - 1);
    JointVec q;
    for (int j = 0; j < kNumJoints; ++j)
      q[j] = start[j] + f * (goal[j] - start[j]);
    path.waypoints.push_back(q);
  }
  return path;
}

struct TrajectorySample {
  JointVec q{};   // rad
  JointVec qd{};  // rad/s
};

// Time-parameterized motion: a trapezoidal velocity profile over the dominant
// joint displacement, the other joint scaled to arrive at the same instant.
// Falls back to a triangular profile when cruise speed is unreachable.
struct TimedTrajectory {
  JointVec start{};
  JointVec goal{};
  JointVec delta{};        // goal - start
  double dominant = 0.0;   // max |delta|, rad
  double duration = 0.0;   // s
  double t_accel = 0.0;    // s
  double t_cruise = 0.0;   // s
  double v_peak = 0.0;     // rad/s on the dominant joint
  double accel = 0.0;      // rad/s^2 on the dominant joint
};

inline TimedTrajectory parameterize(const Path& path, double v_max,
                                    double a_max) {
  if (!(v_max > 0.0) || !(a_max > 0.0))
    throw std::invalid_argument("parameterize: limits must be positive");
  TimedTrajectory traj;
  traj.start = path.waypoints.front();
  traj.goal = path.waypoints.back();
  double dom = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    traj.delta[j] = traj.goal[j] - traj.start[j];
    dom = std::max(dom, std::abs(traj.delta[j]));
  }
  traj.dominant = dom;
  if (dom == 0.0) return traj;  // zero displacement, duration 0

  traj.accel = a_max;
  const double full_accel_dist = v_max * v_max / a_max;  // accel + decel
  if (full_accel_dist <= dom) {
    traj.v_peak = v_max;
    traj.t_accel = v_max / a_max;
    traj.t_cruise = (dom - full_accel_dist) / v_max;
  } else {
    traj.t_accel = std::sqrt(dom / a_max);
    traj.t_cruise = 0.0;
    traj.v_peak = a_max * traj.t_accel;
  }
  traj.duration = 2.0 * traj.t_accel + traj.t_cruise;
  return traj;
}

// Commanded position and velocity at time t; holds the goal with zero
// velocity past the duration.
inline TrajectorySample sample(const TimedTrajectory& traj, double t) {
  TrajectorySample out;
  if (t >= traj.duration || traj.dominant == 0.0) {
    out.q = traj.goal;
    return out;
  }
  if (t <= 0.0) {
    out.q = traj.start;
    return out;
  }
  double dist, speed;  // along the dominant displacement
  if (t < traj.t_accel) {
    speed = traj.accel * t;
    dist = 0.5 * traj.accel * t * t;
  } else if (t < traj.t_accel + traj.t_cruise) {
    speed = traj.v_peak;
    dist = 0.5 * traj.v_peak * traj.t_accel + traj.v_peak * (t - traj.t_accel);
  } else {
    const double remaining = traj.duration - t;
    speed = traj.accel * remaining;
    dist = traj.dominant - 0.5 * traj.accel * remaining * remaining;
  }
  const double fraction = dist / traj.dominant;
  const double rate = speed / traj.dominant;
  for (int j = 0; j < kNumJoints; ++j) {
    out.q[j] = traj.start[j] + traj.delta[j] * fraction;
    out.qd[j] = traj.delta[j] * rate;
  }
  return out;
}

}  // namespace pida2c
