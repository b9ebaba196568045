#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pida2c/common.hpp"
#include "pida2c/errors.hpp"
#include "pida2c/tracking_error.hpp"

namespace pida2c {

// Planar two-link arm with decoupled torque-driven joint dynamics. Joint
// angles are measured from the +y axis; the elbow is restricted to [0, pi].
struct ArmGeometry {
  double l1 = 0.5;  // upper link, m
  double l2 = 0.5;  // forearm, m
  JointVec q_min{-kPi, 0.0};
  JointVec q_max{kPi, kPi};
  JointVec tau_max{20.0, 20.0};   // N*m
  JointVec inertia{0.3, 0.15};    // kg*m^2
  JointVec damping{0.8, 0.8};     // N*m*s/rad

  void validate() const {
    if (!(l1 > 0.0) || !(l2 > 0.0))
      throw std::invalid_argument("link lengths must be positive");
    for (int j = 0; j < kNumJoints; ++j) {
      if (!(q_min[j] < q_max[j]))
        throw std::invalid_argument("q_min must be below q_max");
      if (!(tau_max[j] > 0.0))
        throw std::invalid_argument("tau_max must be positive");
      if (!(inertia[j] > 0.0))
        throw std::invalid_argument("inertia must be positive");
      if (damping[j] < 0.0)
        throw std::invalid_argument("damping must be non-negative");
    }
  }
};

struct ArmState {
  JointVec q{0.0, 0.0};   // rad
  JointVec qd{0.0, 0.0};  // rad/s
  double t = 0.0;         // s
};

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

// Apple sampling region; z is carried through the data model but constant.
struct Workspace {
  double x_min = -0.5, x_max = 0.5;
  double y_min = 0.5, y_max = 0.75;
  double z_fixed = 0.5;
  double min_separation = 0.01;  // m, between consecutive samples

  bool contains(double x, double y, double z) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max &&
           z == z_fixed;
  }
};

inline PlanarPoint forward_kinematics(const ArmGeometry& g, const JointVec& q) {
  return {g.l1 * std::sin(q[0]) + g.l2 * std::sin(q[0] + q[1]),
          g.l1 * std::cos(q[0]) + g.l2 * std::cos(q[0] + q[1])};
}

// Closed-form planar IK, always the elbow-down branch (q2 >= 0).
inline JointVec inverse_kinematics(const ArmGeometry& g, const PlanarPoint& p) {
  const double d2 = p.x * p.x + p.y * p.y;
  const double d = std::sqrt(d2);
  const double reach_max = g.l1 + g.l2;
  const double reach_min = std::abs(g.l1 - g.l2);
  if (d > reach_max + 1e-12 || d < reach_min - 1e-12) {
    throw UnreachableError("inverse_kinematics: point outside reachable annulus");
  }
  const double c2 = std::clamp(
      (d2 - g.l1 * g.l1 - g.l2 * g.l2) / (2.0 * g.l1 * g.l2), -1.0, 1.0);
  const double q2 = std::acos(c2);  // [0, pi]
  double q1 = std::atan2(p.x, p.y) -
              std::atan2(g.l2 * std::sin(q2), g.l1 + g.l2 * c2);
  q1 = std::remainder(q1, 2.0 * kPi);
  JointVec q{q1, q2};
  for (int j = 0; j < kNumJoints; ++j) {
    if (q[j] < g.q_min[j] - 1e-12 || q[j] > g.q_max[j] + 1e-12) {
      throw LimitViolationError("inverse_kinematics: solution breaches joint limits");
    }
    q[j] = std::clamp(q[j], g.q_min[j], g.q_max[j]);
  }
  return q;
}

struct StepOutcome {
  ArmState state;
  bool limit_hit = false;  // a joint was clamped at its stop this step
};

// Semi-implicit Euler step with torque saturation and hard joint stops
// (position clamped, velocity zeroed at contact).
inline StepOutcome step_dynamics(const ArmGeometry& g, const ArmState& s,
                                 const JointVec& torques, double dt) {
  StepOutcome out;
  out.state = s;
  for (int j = 0; j < kNumJoints; ++j) {
    const double tau = std::clamp(torques[j], -g.tau_max[j], g.tau_max[j]);
    const double qdd = (tau - g.damping[j] * s.qd[j]) / g.inertia[j];
    double qd = s.qd[j] + dt * qdd;
    double q = s.q[j] + dt * qd;
    if (q < g.q_min[j]) {
      q = g.q_min[j];
      qd = 0.0;
      out.limit_hit = true;
    } else if (q > g.q_max[j]) {
      q = g.q_max[j];
      qd = 0.0;
      out.limit_hit = true;
    }
    out.state.q[j] = q;
    out.state.qd[j] = qd;
  }
  out.state.t = s.t + dt;
  return out;
}

struct CrashDecision {
  bool crash = false;
  CrashReason reason = CrashReason::kNone;
};

// Stand-in for the motion framework's aborted-motion errors. A motion counts
// as crashed when (a) any joint's tracking error stayed above 0.5 rad for a
// continuous 0.25 s, (b) a joint-limit clamp occurred, or (c) the episode ran
// past the planned duration plus a 2 s settling budget.
inline CrashDecision detect_crash(const EpisodeLog& log,
                                  const ArmState& final_state) {
  if (log.samples.empty()) throw EmptyLogError("detect_crash: empty log");
  constexpr double kErrorThreshold = 0.5;   // rad
  constexpr double kHoldTime = 0.25;        // s
  constexpr double kTimeoutSlack = 2.0;     // s

  for (int j = 0; j < kNumJoints; ++j) {
    double run_start = 0.0;
    bool in_run = false;
    for (const auto& s : log.samples) {
      if (std::abs(s.cmd_q[j] - s.act_q[j]) > kErrorThreshold) {
        if (!in_run) {
          in_run = true;
          run_start = s.t;
        } else if (s.t - run_start >= kHoldTime) {
          return {true, CrashReason::kTrackingDivergence};
        }
      } else {
        in_run = false;
      }
    }
  }
  if (log.limit_clamp_events > 0) return {true, CrashReason::kLimitHit};

  const double dt =
      log.samples.size() > 1 ? log.samples[1].t - log.samples[0].t : 0.0;
  if (final_state.t > log.planned_duration + kTimeoutSlack + 0.5 * dt) {
    return {true, CrashReason::kTimeout};
  }
  return {};
}

}  // namespace pida2c
