#pragma once

#include <array>

namespace pida2c {

inline constexpr int kNumJoints = 2;  // shoulder J1, elbow J2

// Per-joint quantity (angles, velocities, torques, ...).
using JointVec = std::array<double, kNumJoints>;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace pida2c
