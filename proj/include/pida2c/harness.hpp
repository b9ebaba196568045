#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pida2c/agent.hpp"
#include "pida2c/control.hpp"
#include "pida2c/plant.hpp"
#include "pida2c/regression.hpp"
#include "pida2c/rng.hpp"
#include "pida2c/svg.hpp"
#include "pida2c/tracking_error.hpp"
#include "pida2c/trajectory.hpp"

namespace pida2c {

// Hand-tuned reference gains for the two arm joints.
struct BaselineGains {
  PidGains j1{15.0, 0.0, 1.0};
  PidGains j2{30.0, 0.0, 1.0};

  std::array<PidGains, 2> as_array() const { return {j1, j2}; }
};

inline const BaselineGains kBaselineGains{};

enum class Mode {
  kSingleAppleSingleActuator,
  kSingleAppleTwoActuator,
  kMultiApple,
};

enum class Scale { kDesk, kPaper };

// Fixed plant-side constants of the episode loop.
struct SimParams {
  double dt = 1e-3;             // s
  double v_max = 1.5;           // rad/s
  double a_max = 3.0;           // rad/s^2
  double dwell = 0.2;           // s held at the apple between legs
  double settle_pos_tol = 0.02; // rad
  double settle_vel_tol = 0.05; // rad/s
  int path_waypoints = 11;
  std::array<double, 3> home{0.55, 0.20, 0.5};  // harvest basket stand-in
};

struct ExperimentSpec {
  Mode mode = Mode::kSingleAppleTwoActuator;
  Scale scale = Scale::kDesk;
  std::vector<int> tuned_joints{0, 1};  // indices into {J1, J2}
  int steps = 600;                      // single-apple modes
  int epochs = 20;                      // multi-apple
  int train_coords = 30;                // multi-apple
  int test_coords = 30;
  std::array<double, 3> apple{0.0, 0.625, 0.5};
  AgentConfig agent;
  std::uint64_t seed = 1;
  int baseline_runs = 20;
  std::vector<int> dump_trajectory_steps;
  std::vector<int> inject_crash_steps;  // test hook: force a crash verdict
  SimParams sim;
  ArmGeometry geometry;
  Workspace workspace;

  static ExperimentSpec defaults(Mode mode, Scale scale) {
    ExperimentSpec spec;
    spec.mode = mode;
    spec.scale = scale;
    switch (mode) {
      case Mode::kSingleAppleSingleActuator:
        spec.tuned_joints = {0};
        spec.steps = scale == Scale::kPaper ? 1000 : 300;
        spec.agent.actor_lr = 5e-4;
        spec.agent.critic_lr = 1e-4;
        break;
      case Mode::kSingleAppleTwoActuator:
        spec.tuned_joints = {0, 1};
        spec.steps = scale == Scale::kPaper ? 3000 : 600;
        spec.agent.actor_lr = 5e-5;
        spec.agent.critic_lr = 1e-5;
        break;
      case Mode::kMultiApple:
        spec.tuned_joints = {0, 1};
        spec.epochs = scale == Scale::kPaper ? 100 : 20;
        spec.train_coords = scale == Scale::kPaper ? 100 : 30;
        spec.test_coords = scale == Scale::kPaper ? 100 : 30;
        spec.agent.actor_lr = 5e-5;
        spec.agent.critic_lr = 1e-5;
        break;
    }
    spec.agent.tuned_joint_count = static_cast<int>(spec.tuned_joints.size());
    return spec;
  }

  void validate() const {
    geometry.validate();
    agent.validate();
    if (tuned_joints.empty() || tuned_joints.size() > 2)
      throw ConfigError("tuned_joints must name one or two joints");
    for (int j : tuned_joints) {
      if (j < 0 || j >= kNumJoints)
        throw ConfigError("tuned_joints entries must be J1 or J2");
    }
    if (mode == Mode::kSingleAppleSingleActuator && tuned_joints.size() != 1)
      throw ConfigError("single-actuator mode tunes exactly one joint");
    if (mode != Mode::kSingleAppleSingleActuator && tuned_joints.size() != 2)
      throw ConfigError("two-actuator modes tune both joints");
    if (agent.tuned_joint_count != static_cast<int>(tuned_joints.size()))
      throw ConfigError("agent.tuned_joint_count inconsistent with tuned_joints");
    if (mode == Mode::kMultiApple) {
      if (epochs < 1 || train_coords < 1 || test_coords < 1)
        throw ConfigError("multi-apple mode needs positive epochs and coords");
    } else {
      if (steps < 1) throw ConfigError("steps must be positive");
      if (!workspace.contains(apple[0], apple[1], apple[2]))
        throw ConfigError("apple coordinate outside the workspace");
    }
    if (baseline_runs < 1) throw ConfigError("baseline_runs must be positive");
  }
};

inline const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kSingleAppleSingleActuator: return "single-apple-single-actuator";
    case Mode::kSingleAppleTwoActuator: return "single-apple-two-actuator";
    case Mode::kMultiApple: return "multi-apple";
  }
  return "?";
}

inline const char* scale_name(Scale scale) {
  return scale == Scale::kPaper ? "paper" : "desk";
}

inline nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["mode"] = mode_name(spec.mode);
  j["scale"] = scale_name(spec.scale);
  nlohmann::json joints = nlohmann::json::array();
  for (int t : spec.tuned_joints) joints.push_back(t == 0 ? "J1" : "J2");
  j["tuned_joints"] = joints;
  if (spec.mode == Mode::kMultiApple) {
    j["epochs"] = spec.epochs;
    j["train_coords"] = spec.train_coords;
  } else {
    j["steps"] = spec.steps;
    j["apple"] = spec.apple;
  }
  j["test_coords"] = spec.test_coords;
  j["seed"] = spec.seed;
  j["baseline_runs"] = spec.baseline_runs;
  if (!spec.dump_trajectory_steps.empty())
    j["dump_trajectory_steps"] = spec.dump_trajectory_steps;
  if (!spec.inject_crash_steps.empty())
    j["inject_crash_steps"] = spec.inject_crash_steps;
  j["agent"] = {{"actor_lr", spec.agent.actor_lr},
                {"critic_lr", spec.agent.critic_lr},
                {"discount", spec.agent.discount},
                {"clip_norm", spec.agent.clip_norm},
                {"bounds",
                 {{"kp", spec.agent.bounds.kp},
                  {"ki", spec.agent.bounds.ki},
                  {"kd", spec.agent.bounds.kd}}}};
  return j;
}

struct StepRecord {
  int step = 0;
  int epoch = 0;
  std::array<double, 3> apple{};
  std::array<PidGains, 2> gains{};  // applied gains, both joints
  double reward = 0.0;
  double delta = 0.0;
  double value = 0.0;
  bool crash = false;
  bool recovery = false;  // fail-safe motion, no learning, not a step
  bool skipped = false;   // unreachable coordinate, no motion executed
};

// RNG stream ids under the experiment seed (the agent itself uses 0 and 1).
inline constexpr std::uint64_t kStreamAction = 2;
inline constexpr std::uint64_t kStreamApples = 3;
inline constexpr std::uint64_t kStreamShuffle = 4;
inline constexpr std::uint64_t kStreamHeldout = 5;

// One full motion home -> apple (dwell) -> home under the given gains.
// Each leg holds its goal until the arm settles, within a shared 2 s budget
// past the planned duration; running out of budget is a timeout crash.
inline EpisodeLog simulate_episode(const ArmGeometry& geom,
                                   const SimParams& sim,
                                   const std::array<PidGains, 2>& gains,
                                   const std::array<double, 3>& apple) {
  const JointVec q_home =
      inverse_kinematics(geom, {sim.home[0], sim.home[1]});
  const JointVec q_apple = inverse_kinematics(geom, {apple[0], apple[1]});
  const auto leg_out = parameterize(
      plan_path(geom, q_home, q_apple, sim.path_waypoints), sim.v_max, sim.a_max);
  const auto leg_back = parameterize(
      plan_path(geom, q_apple, q_home, sim.path_waypoints), sim.v_max, sim.a_max);

  EpisodeLog log;
  log.planned_duration = leg_out.duration + sim.dwell + leg_back.duration;
  const double cap = log.planned_duration + 2.0;

  ArmState state;
  state.q = q_home;
  std::array<ControlStrategy, 2> strategy;
  std::array<StrategyState, 2> loops{};
  for (int j = 0; j < kNumJoints; ++j) strategy[j].position_gains = gains[j];

  auto tick = [&](const TrajectorySample& cmd) {
    log.samples.push_back({state.t, cmd.q, state.q});
    JointVec tau;
    for (int j = 0; j < kNumJoints; ++j) {
      tau[j] = strategy_output(strategy[j], loops[j], cmd.q[j], cmd.qd[j],
                               state.q[j], state.qd[j], sim.dt);
    }
    const auto out = step_dynamics(geom, state, tau, sim.dt);
    state = out.state;
    if (out.limit_hit) ++log.limit_clamp_events;
  };
  auto settled = [&](const JointVec& goal) {
    for (int j = 0; j < kNumJoints; ++j) {
      if (std::abs(state.q[j] - goal[j]) > sim.settle_pos_tol) return false;
      if (std::abs(state.qd[j]) > sim.settle_vel_tol) return false;
    }
    return true;
  };

  // Runs one phase to at least min_duration, then until the settle goal is
  // met (if any). Always ticks at least once so zero-length phases still log.
  // Hitting the episode cap ticks once more past it, making the timeout
  // unambiguous in the log, and stops the phase chain.
  auto run_phase = [&](const TimedTrajectory* traj, double min_duration,
                       const JointVec& hold, const JointVec* settle_goal) {
    const double start = state.t;
    while (true) {
      const bool over_cap = state.t >= cap;
      tick(traj ? sample(*traj, state.t - start) : TrajectorySample{hold, {}});
      if (over_cap) return false;
      const double elapsed = state.t - start;
      if (elapsed + 1e-12 < min_duration) continue;
      if (settle_goal && !settled(*settle_goal)) continue;
      return true;
    }
  };

  if (run_phase(&leg_out, leg_out.duration, q_apple, &q_apple) &&
      run_phase(nullptr, sim.dwell, q_apple, nullptr)) {
    run_phase(&leg_back, leg_back.duration, q_home, &q_home);
  }

  const auto decision = detect_crash(log, state);
  log.crash = decision.crash;
  log.crash_reason = decision.reason;
  return log;
}

// Gains actually applied: sampled gains on the tuned joints, baseline
// elsewhere.
inline std::array<PidGains, 2> merge_gains(
    const std::vector<int>& tuned_joints,
    const std::vector<PidGains>& tuned_gains) {
  auto gains = kBaselineGains.as_array();
  for (std::size_t i = 0; i < tuned_joints.size(); ++i) {
    gains[static_cast<std::size_t>(tuned_joints[i])] = tuned_gains[i];
  }
  return gains;
}

// One training step: sample gains, run the full motion, score it, update the
// critic and the actor. An unreachable apple yields a skipped record and no
// learning; a crash is learned from with the fixed penalty reward.
inline StepRecord run_episode(A2cAgent& agent, const ExperimentSpec& spec,
                              const std::array<double, 3>& apple, Rng& rng,
                              int step, int epoch, bool inject_crash = false,
                              EpisodeLog* keep_log = nullptr) {
  StepRecord rec;
  rec.step = step;
  rec.epoch = epoch;
  rec.apple = apple;

  const ActionSample action = agent.act(apple, rng);
  rec.gains = merge_gains(spec.tuned_joints, action.gains);

  EpisodeLog log;
  try {
    log = simulate_episode(spec.geometry, spec.sim, rec.gains, apple);
  } catch (const UnreachableError&) {
    rec.skipped = true;
    return rec;
  }
  if (inject_crash && !log.crash) {
    log.crash = true;
    log.crash_reason = CrashReason::kTrackingDivergence;
  }
  const Reward reward = compute_reward(log);
  rec.reward = reward.value;
  rec.crash = log.crash;

  const auto learned = agent.learn(apple, action, reward.value);
  rec.value = learned.value;
  rec.delta = learned.delta;
  if (keep_log) *keep_log = std::move(log);
  return rec;
}

// Post-crash protocol: restore the baseline gains and execute two full
// motions that are flagged, unlearned and uncounted. A crashing recovery
// motion is retried once; a second fault aborts the experiment.
inline std::vector<StepRecord> run_failsafe(const ExperimentSpec& spec,
                                            const std::array<double, 3>& apple,
                                            int step, int epoch) {
  std::vector<StepRecord> records;
  const auto gains = kBaselineGains.as_array();
  int clean = 0;
  bool retried = false;
  while (clean < 2) {
    const EpisodeLog log = simulate_episode(spec.geometry, spec.sim, gains, apple);
    StepRecord rec;
    rec.step = step;
    rec.epoch = epoch;
    rec.apple = apple;
    rec.gains = gains;
    rec.recovery = true;
    rec.reward = compute_reward(log).value;
    rec.crash = log.crash;
    records.push_back(rec);
    if (log.crash) {
      if (retried)
        throw DoubleFaultError("fail-safe recovery crashed after retry");
      retried = true;
      continue;
    }
    ++clean;
  }
  return records;
}

// Uniform workspace samples with z fixed; a candidate closer than the
// separation threshold to the previous sample is rejected and redrawn.
inline std::vector<std::array<double, 3>> sample_apples(const Workspace& ws,
                                                        int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_apples: count must be >= 1");
  std::vector<std::array<double, 3>> coords;
  coords.reserve(static_cast<std::size_t>(count));
  int rejects = 0;
  while (static_cast<int>(coords.size()) < count) {
    const double x = rng.uniform(ws.x_min, ws.x_max);
    const double y = rng.uniform(ws.y_min, ws.y_max);
    if (!coords.empty()) {
      const auto& prev = coords.back();
      const double dx = x - prev[0], dy = y - prev[1];
      if (std::sqrt(dx * dx + dy * dy) < ws.min_separation) {
        if (++rejects > 100000)
          throw std::runtime_error("sample_apples: separation unsatisfiable");
        continue;
      }
    }
    coords.push_back({x, y, ws.z_fixed});
  }
  return coords;
}

struct BaselineStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Reward statistics of the baseline gains over the given apples, each run
// n_runs times with no learning.
inline BaselineStats evaluate_baseline(
    const ArmGeometry& geom, const SimParams& sim,
    std::span<const std::array<double, 3>> apples, int n_runs) {
  if (n_runs < 1) throw std::invalid_argument("evaluate_baseline: n_runs >= 1");
  const auto gains = kBaselineGains.as_array();
  std::vector<double> rewards;
  rewards.reserve(apples.size() * static_cast<std::size_t>(n_runs));
  for (const auto& apple : apples) {
    for (int r = 0; r < n_runs; ++r) {
      const auto log = simulate_episode(geom, sim, gains, apple);
      rewards.push_back(compute_reward(log).value);
    }
  }
  BaselineStats stats;
  for (double r : rewards) stats.mean += r;
  stats.mean /= static_cast<double>(rewards.size());
  for (double r : rewards)
    stats.stddev += (r - stats.mean) * (r - stats.mean);
  stats.stddev = std::sqrt(stats.stddev / static_cast<double>(rewards.size()));
  return stats;
}

struct RunArtifact {
  ExperimentSpec spec;
  std::vector<StepRecord> records;
  std::vector<std::array<double, 3>> train_coords;
  BaselineStats baseline;
  Mlp actor;
  Mlp critic;
  std::uint64_t actor_seed = 0;
  std::uint64_t critic_seed = 0;
  std::map<int, EpisodeLog> dumped_trajectories;
  bool aborted = false;
  std::string abort_reason;
};

namespace detail {
inline bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}
}  // namespace detail

// Extension point where a hardware deployment would pause training while the
// actuators cool down. The simulated arm has no thermal model, so the hook
// does nothing.
inline void cooling_suspension_hook(int /*step*/) {}

// Full training schedule: fixed apple for the single-apple modes, shuffled
// epochs over a sampled coordinate set for the multi-apple mode. Crashes are
// learned from and followed by the fail-safe; a double fault aborts with the
// partial record intact.
inline RunArtifact run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  RunArtifact art;
  art.spec = spec;

  AgentConfig agent_cfg = spec.agent;
  agent_cfg.seed = spec.seed;
  agent_cfg.tuned_joint_count = static_cast<int>(spec.tuned_joints.size());
  A2cAgent agent(agent_cfg);

  Rng action_rng(mix_seed(spec.seed, kStreamAction));
  Rng apple_rng(mix_seed(spec.seed, kStreamApples));
  Rng shuffle_rng(mix_seed(spec.seed, kStreamShuffle));

  const bool multi = spec.mode == Mode::kMultiApple;
  if (multi) {
    art.train_coords = sample_apples(spec.workspace, spec.train_coords, apple_rng);
  } else {
    art.train_coords = {spec.apple};
  }
  const int epochs = multi ? spec.epochs : 1;
  const int steps_per_epoch =
      multi ? spec.train_coords : spec.steps;

  int step = 0;
  try {
    for (int epoch = 0; epoch < epochs; ++epoch) {
      std::vector<int> order(static_cast<std::size_t>(steps_per_epoch));
      for (int i = 0; i < steps_per_epoch; ++i) order[static_cast<std::size_t>(i)] = i;
      if (multi) shuffle_rng.shuffle(order);
      for (int i : order) {
        const auto apple = multi ? art.train_coords[static_cast<std::size_t>(i)]
                                 : spec.apple;
        const bool inject = detail::contains(spec.inject_crash_steps, step);
        const bool dump = detail::contains(spec.dump_trajectory_steps, step);
        EpisodeLog log;
        const StepRecord rec =
            run_episode(agent, spec, apple, action_rng, step, epoch, inject,
                        dump ? &log : nullptr);
        art.records.push_back(rec);
        if (dump && !rec.skipped) art.dumped_trajectories[step] = std::move(log);
        if (rec.crash) {
          const auto recovery = run_failsafe(spec, apple, step, epoch);
          art.records.insert(art.records.end(), recovery.begin(), recovery.end());
        }
        cooling_suspension_hook(step);
        ++step;
      }
    }
  } catch (const DoubleFaultError& e) {
    art.aborted = true;
    art.abort_reason = e.what();
  }

  art.baseline = evaluate_baseline(spec.geometry, spec.sim, art.train_coords,
                                   spec.baseline_runs);
  art.actor = agent.actor();
  art.critic = agent.critic();
  art.actor_seed = agent.actor_init_seed();
  art.critic_seed = agent.critic_init_seed();
  return art;
}

struct GainCoefficients {
  bool valid = false;
  std::string message;
  int rows = 0;
  double intercept = 0.0;
  std::array<double, 6> slopes{};  // j1 kp/ki/kd, j2 kp/ki/kd
  bool singular = false;
  std::vector<int> dropped;  // slope indices excluded as collinear
};

// OLS of the reward (negated total error; the crash penalty stands in when
// crashes are included) on the six gain columns plus an intercept.
inline GainCoefficients fit_coefficients(std::span<const StepRecord> records,
                                         bool include_crashes) {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (const auto& r : records) {
    if (r.recovery || r.skipped) continue;
    if (!include_crashes && r.crash) continue;
    rows.push_back({1.0, r.gains[0].kp, r.gains[0].ki, r.gains[0].kd,
                    r.gains[1].kp, r.gains[1].ki, r.gains[1].kd});
    y.push_back(r.reward);
  }
  GainCoefficients out;
  out.rows = static_cast<int>(rows.size());
  if (out.rows < 10) {
    out.message = "need at least 10 records";
    return out;
  }
  const OlsFit fit = ols_fit(rows, y);
  out.valid = true;
  out.intercept = fit.coeffs[0];
  for (int i = 0; i < 6; ++i)
    out.slopes[static_cast<std::size_t>(i)] = fit.coeffs[static_cast<std::size_t>(i) + 1];
  out.singular = fit.singular;
  for (int d : fit.dropped)
    if (d > 0) out.dropped.push_back(d - 1);
  if (fit.singular) out.message = "collinear columns dropped";
  return out;
}

// ---- run directory I/O --------------------------------------------------

inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Computed decimals are emitted at 9 significant digits everywhere, JSON
// included.
inline double round_g9(double v) { return std::stod(format_g9(v)); }

inline const char* kStepsCsvHeader =
    "step,epoch,apple_x,apple_y,apple_z,j1_kp,j1_ki,j1_kd,j2_kp,j2_ki,j2_kd,"
    "reward,td_error,value,crash,recovery,skipped";

inline void write_steps_csv(std::span<const StepRecord> records,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << kStepsCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.step << ',' << r.epoch << ',' << format_g9(r.apple[0]) << ','
        << format_g9(r.apple[1]) << ',' << format_g9(r.apple[2]);
    for (int j = 0; j < 2; ++j) {
      out << ',' << format_g9(r.gains[static_cast<std::size_t>(j)].kp) << ','
          << format_g9(r.gains[static_cast<std::size_t>(j)].ki) << ','
          << format_g9(r.gains[static_cast<std::size_t>(j)].kd);
    }
    out << ',' << format_g9(r.reward) << ',' << format_g9(r.delta) << ','
        << format_g9(r.value) << ',' << (r.crash ? 1 : 0) << ','
        << (r.recovery ? 1 : 0) << ',' << (r.skipped ? 1 : 0) << "\n";
  }
  if (!out) throw IoError(path, "write failed");
}

inline std::vector<StepRecord> read_steps_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != kStepsCsvHeader)
    throw IoError(path, "unexpected steps.csv header");
  std::vector<StepRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 17) throw IoError(path, "bad steps.csv row");
    StepRecord r;
    r.step = std::stoi(cells[0]);
    r.epoch = std::stoi(cells[1]);
    for (int k = 0; k < 3; ++k)
      r.apple[static_cast<std::size_t>(k)] = std::stod(cells[static_cast<std::size_t>(2 + k)]);
    r.gains[0] = {std::stod(cells[5]), std::stod(cells[6]), std::stod(cells[7])};
    r.gains[1] = {std::stod(cells[8]), std::stod(cells[9]), std::stod(cells[10])};
    r.reward = std::stod(cells[11]);
    r.delta = std::stod(cells[12]);
    r.value = std::stod(cells[13]);
    r.crash = cells[14] == "1";
    r.recovery = cells[15] == "1";
    r.skipped = cells[16] == "1";
    records.push_back(r);
  }
  return records;
}

inline void write_coefficients_csv(const GainCoefficients& excluded,
                                   const GainCoefficients& included,
                                   const std::string& path) {
  static const char* kTerms[] = {"intercept", "j1_kp", "j1_ki", "j1_kd",
                                 "j2_kp",     "j2_ki", "j2_kd"};
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "term,crash_excluded,crash_included\n";
  auto cell = [](const GainCoefficients& c, int term) -> std::string {
    if (!c.valid) return "";
    return format_g9(term == 0 ? c.intercept
                               : c.slopes[static_cast<std::size_t>(term - 1)]);
  };
  for (int t = 0; t < 7; ++t)
    out << kTerms[t] << ',' << cell(excluded, t) << ',' << cell(included, t)
        << "\n";
  out << "rows_used," << excluded.rows << ',' << included.rows << "\n";
  out << "singular," << (excluded.singular ? 1 : 0) << ','
      << (included.singular ? 1 : 0) << "\n";
  if (!out) throw IoError(path, "write failed");
}

namespace detail {

inline void write_reward_chart(const RunArtifact& art, const std::string& path) {
  SvgPanel panel;
  panel.title = "reward per step (dashed: baseline mean)";
  panel.y_label = "reward";
  SvgSeries series;
  for (const auto& r : art.records) {
    if (r.recovery || r.skipped) continue;
    series.x.push_back(r.step);
    series.y.push_back(r.reward);
  }
  panel.series.push_back(std::move(series));
  panel.hlines.push_back({art.baseline.mean, "#d62728"});
  write_svg_panels(path, {panel}, "step");
}

inline void write_gain_charts(const RunArtifact& art, int joint,
                              const std::string& path) {
  const char* names[] = {"Kp", "Ki", "Kd"};
  std::vector<SvgPanel> panels(3);
  for (int g = 0; g < 3; ++g) {
    panels[static_cast<std::size_t>(g)].title =
        std::string(names[g]) + " J" + std::to_string(joint + 1) + " per step";
    panels[static_cast<std::size_t>(g)].y_label = names[g];
    SvgSeries series;
    for (const auto& r : art.records) {
      if (r.recovery || r.skipped) continue;
      const auto& gains = r.gains[static_cast<std::size_t>(joint)];
      series.x.push_back(r.step);
      series.y.push_back(g == 0 ? gains.kp : g == 1 ? gains.ki : gains.kd);
    }
    panels[static_cast<std::size_t>(g)].series.push_back(std::move(series));
  }
  write_svg_panels(path, panels, "step");
}

}  // namespace detail

// Writes the run directory: steps.csv, coefficients.csv, meta.json, actor and
// critic checkpoints, reward/gain charts, and any requested per-step
// trajectory logs.
inline void export_results(const RunArtifact& art, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create output directory");
  const auto at = [&](const std::string& name) {
    return (fs::path(dir) / name).string();
  };

  write_steps_csv(art.records, at("steps.csv"));
  write_coefficients_csv(fit_coefficients(art.records, false),
                         fit_coefficients(art.records, true),
                         at("coefficients.csv"));
  save_checkpoint(art.actor, art.actor_seed, at("actor"));
  save_checkpoint(art.critic, art.critic_seed, at("critic"));
  for (const auto& [step, log] : art.dumped_trajectories) {
    write_log_csv(log, at("trajectory_" + std::to_string(step) + ".csv"));
  }

  nlohmann::json meta;
  meta["version"] = "0.1.0";
  meta["format"] = 1;
  meta["spec"] = spec_to_json(art.spec);
  meta["seed"] = art.spec.seed;
  meta["baseline_mean"] = round_g9(art.baseline.mean);
  meta["baseline_stddev"] = round_g9(art.baseline.stddev);
  meta["aborted"] = art.aborted;
  if (art.aborted) meta["abort_reason"] = art.abort_reason;
  if (art.spec.mode == Mode::kMultiApple) {
    meta["train_coords"] = art.train_coords;
  }
  {
    const std::string path = at("meta.json");
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << meta.dump(2) << "\n";
  }

  detail::write_reward_chart(art, at("reward_vs_step.svg"));
  detail::write_gain_charts(art, 0, at("gains_vs_step_j1.svg"));
  detail::write_gain_charts(art, 1, at("gains_vs_step_j2.svg"));
}

inline RunArtifact run_experiment(const ExperimentSpec& spec,
                                  const std::string& out_dir) {
  RunArtifact art = run_experiment(spec);
  export_results(art, out_dir);
  return art;
}

// Greedy evaluation of a trained actor on freshly sampled coordinates,
// scored against the baseline gains coordinate by coordinate.
struct HeldoutResult {
  std::vector<std::array<double, 3>> coords;
  std::vector<double> model_reward;
  std::vector<double> baseline_reward;
  int improved = 0;
  int ties = 0;
  double fraction_improved = 0.0;  // of all coordinates
};

inline HeldoutResult evaluate_heldout(const ExperimentSpec& spec,
                                      const Mlp& actor) {
  Rng rng(mix_seed(spec.seed, kStreamHeldout));
  HeldoutResult result;
  result.coords = sample_apples(spec.workspace, spec.test_coords, rng);
  const auto baseline = kBaselineGains.as_array();
  for (const auto& coord : result.coords) {
    const auto tuned = greedy_action(actor, coord, spec.agent.bounds);
    const auto gains = merge_gains(spec.tuned_joints, tuned);
    const double model =
        compute_reward(simulate_episode(spec.geometry, spec.sim, gains, coord))
            .value;
    const double base = compute_reward(simulate_episode(spec.geometry, spec.sim,
                                                        baseline, coord))
                            .value;
    result.model_reward.push_back(model);
    result.baseline_reward.push_back(base);
    if (model == base) {
      ++result.ties;
    } else if (model > base) {
      ++result.improved;
    }
  }
  result.fraction_improved =
      static_cast<double>(result.improved) /
      static_cast<double>(result.coords.size());
  return result;
}

inline void write_heldout_csv(const HeldoutResult& result,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "x,y,z,model_reward,baseline_reward,improved\n";
  for (std::size_t i = 0; i < result.coords.size(); ++i) {
    const auto& c = result.coords[i];
    const bool improved = result.model_reward[i] > result.baseline_reward[i];
    out << format_g9(c[0]) << ',' << format_g9(c[1]) << ',' << format_g9(c[2])
        << ',' << format_g9(result.model_reward[i]) << ','
        << format_g9(result.baseline_reward[i]) << ',' << (improved ? 1 : 0)
        << "\n";
  }
  if (!out) throw IoError(path, "write failed");
}

}  // namespace pida2c
