#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pida2c/common.hpp"
#include "pida2c/errors.hpp"
#include "pida2c/spline.hpp"

namespace pida2c {

inline constexpr double kCrashReward = -3.0;

enum class CrashReason { kNone, kTrackingDivergence, kLimitHit, kTimeout };

struct LogSample {
  double t = 0.0;    // s
  JointVec cmd_q{};  // commanded positions, rad
  JointVec act_q{};  // actual positions, rad
};

// Tick-by-tick record of one full motion (out, dwell, back). Appended by a
// single writer during an episode, read-only afterwards.
struct EpisodeLog {
  std::vector<LogSample> samples;
  bool crash = false;
  CrashReason crash_reason = CrashReason::kNone;
  int limit_clamp_events = 0;     // joint-limit contacts seen while stepping
  double planned_duration = 0.0;  // legs + dwell, s
};

struct Reward {
  double value = 0.0;  // <= 0 in normal operation
  bool crash_penalty_applied = false;
};

// Per-sample |commanded - actual| summed over joints.
inline std::vector<double> absolute_errors(const EpisodeLog& log) {
  if (log.samples.empty()) throw EmptyLogError("absolute_errors: empty log");
  std::vector<double> errors;
  errors.reserve(log.samples.size());
  for (const auto& s : log.samples) {
    double e = 0.0;
    for (int j = 0; j < kNumJoints; ++j) e += std::abs(s.cmd_q[j] - s.act_q[j]);
    errors.push_back(e);
  }
  return errors;
}

// Area under the error signal: cubic interpolating spline through the samples
// integrated over the full time range. Fewer than four samples fall back to
// the trapezoid rule.
inline double integrate_error(std::span<const double> times,
                              std::span<const double> errors) {
  if (times.empty()) throw EmptyLogError("integrate_error: no samples");
  if (times.size() < 4) return trapezoid(times, errors);
  return CubicSpline(times, errors).integral();
}

inline Reward compute_reward(const EpisodeLog& log) {
  if (log.samples.empty()) throw EmptyLogError("compute_reward: empty log");
  if (log.crash) return Reward{kCrashReward, true};
  const auto errors = absolute_errors(log);
  std::vector<double> times;
  times.reserve(log.samples.size());
  for (const auto& s : log.samples) times.push_back(s.t);
  const double area = integrate_error(times, errors);
  return Reward{-std::max(area, 0.0), false};
}

inline void write_log_csv(const EpisodeLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "t,cmd_q1,cmd_q2,act_q1,act_q2\n";
  char buf[160];
  for (const auto& s : log.samples) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", s.t,
                  s.cmd_q[0], s.cmd_q[1], s.act_q[0], s.act_q[1]);
    out << buf;
  }
  if (!out) throw IoError(path, "write failed");
}

}  // namespace pida2c
