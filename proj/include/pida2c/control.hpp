#pragma once

namespace pida2c {

// PID tuning constants. kp is dimensionless, ki has unit 1/s, kd has unit s.
struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

struct PidState {
  double integral = 0.0;    // accumulated error * dt (rad*s)
  double prev_error = 0.0;  // rad
  bool initialized = false;
};

inline void reset(PidState& state) { state = PidState{}; }

// Discrete PID law: backward-Euler integral, first-difference derivative on
// the error. The derivative is 0 on the first call after reset so a fresh
// controller produces no derivative kick.
inline double pid_step(const PidGains& gains, PidState& state, double error,
                       double dt) {
  state.integral += error * dt;
  const double derivative =
      state.initialized ? (error - state.prev_error) / dt : 0.0;
  state.prev_error = error;
  state.initialized = true;
  return gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
}

// Position, velocity and effort loops summed into one effort command. The
// default configuration zeroes all but the position loop.
struct ControlStrategy {
  PidGains position_gains;
  PidGains velocity_gains;  // zeroed by default
  PidGains effort_gains;    // zeroed by default
};

struct StrategyState {
  PidState position;
  PidState velocity;
  PidState effort;
};

inline double strategy_output(const ControlStrategy& strategy,
                              StrategyState& state, double commanded_pos,
                              double commanded_vel, double measured_pos,
                              double measured_vel, double dt) {
  double out = pid_step(strategy.position_gains, state.position,
                        commanded_pos - measured_pos, dt);
  out += pid_step(strategy.velocity_gains, state.velocity,
                  commanded_vel - measured_vel, dt);
  // No effort reference exists; the effort loop sees zero error.
  out += pid_step(strategy.effort_gains, state.effort, 0.0, dt);
  return out;
}

inline void reset(StrategyState& state) {
  reset(state.position);
  reset(state.velocity);
  reset(state.effort);
}

}  // namespace pida2c
