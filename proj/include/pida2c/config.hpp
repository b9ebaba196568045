#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pida2c/errors.hpp"
#include "pida2c/harness.hpp"

namespace pida2c {

inline Mode parse_mode(const std::string& name) {
  if (name == "single-apple-single-actuator")
    return Mode::kSingleAppleSingleActuator;
  if (name == "single-apple-two-actuator") return Mode::kSingleAppleTwoActuator;
  if (name == "multi-apple") return Mode::kMultiApple;
  throw ConfigError("unknown mode: " + name);
}

inline Scale parse_scale(const std::string& name) {
  if (name == "desk") return Scale::kDesk;
  if (name == "paper") return Scale::kPaper;
  throw ConfigError("unknown scale: " + name + " (expected desk or paper)");
}

// Builds an ExperimentSpec from a config JSON object. The mode is required;
// everything else starts from the mode/scale defaults and may be overridden.
inline ExperimentSpec spec_from_json(const nlohmann::json& j,
                                     std::optional<Scale> scale_override = {},
                                     std::optional<std::uint64_t> seed_override = {}) {
  try {
    if (!j.contains("mode")) throw ConfigError("config is missing \"mode\"");
    const Mode mode = parse_mode(j.at("mode").get<std::string>());
    Scale scale = Scale::kDesk;
    if (j.contains("scale")) scale = parse_scale(j.at("scale").get<std::string>());
    if (scale_override) scale = *scale_override;

    ExperimentSpec spec = ExperimentSpec::defaults(mode, scale);

    if (j.contains("tuned_joints")) {
      spec.tuned_joints.clear();
      for (const auto& name : j.at("tuned_joints")) {
        const std::string s = name.get<std::string>();
        if (s == "J1")
          spec.tuned_joints.push_back(0);
        else if (s == "J2")
          spec.tuned_joints.push_back(1);
        else
          throw ConfigError("tuned_joints entries must be \"J1\" or \"J2\"");
      }
      spec.agent.tuned_joint_count = static_cast<int>(spec.tuned_joints.size());
    }
    if (j.contains("steps")) spec.steps = j.at("steps").get<int>();
    if (j.contains("epochs")) spec.epochs = j.at("epochs").get<int>();
    if (j.contains("train_coords"))
      spec.train_coords = j.at("train_coords").get<int>();
    if (j.contains("test_coords"))
      spec.test_coords = j.at("test_coords").get<int>();
    if (j.contains("apple")) {
      const auto a = j.at("apple").get<std::vector<double>>();
      if (a.size() != 3) throw ConfigError("apple must be [x, y, z]");
      spec.apple = {a[0], a[1], a[2]};
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (seed_override) spec.seed = *seed_override;
    if (j.contains("baseline_runs"))
      spec.baseline_runs = j.at("baseline_runs").get<int>();
    if (j.contains("dump_trajectory_steps"))
      spec.dump_trajectory_steps =
          j.at("dump_trajectory_steps").get<std::vector<int>>();
    if (j.contains("inject_crash_steps"))
      spec.inject_crash_steps =
          j.at("inject_crash_steps").get<std::vector<int>>();

    if (j.contains("agent")) {
      const auto& a = j.at("agent");
      if (a.contains("actor_lr")) spec.agent.actor_lr = a.at("actor_lr").get<double>();
      if (a.contains("critic_lr"))
        spec.agent.critic_lr = a.at("critic_lr").get<double>();
      if (a.contains("discount")) spec.agent.discount = a.at("discount").get<double>();
      if (a.contains("clip_norm"))
        spec.agent.clip_norm = a.at("clip_norm").get<double>();
      if (a.contains("bounds")) {
        const auto& b = a.at("bounds");
        if (b.contains("kp")) spec.agent.bounds.kp = b.at("kp").get<double>();
        if (b.contains("ki")) spec.agent.bounds.ki = b.at("ki").get<double>();
        if (b.contains("kd")) spec.agent.bounds.kd = b.at("kd").get<double>();
      }
    }
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      if (g.contains("tau_max")) {
        const auto t = g.at("tau_max").get<std::vector<double>>();
        if (t.size() != 2) throw ConfigError("geometry.tau_max must have 2 entries");
        spec.geometry.tau_max = {t[0], t[1]};
      }
    }

    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

inline ExperimentSpec load_config(const std::string& path,
                                  std::optional<Scale> scale_override = {},
                                  std::optional<std::uint64_t> seed_override = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return spec_from_json(j, scale_override, seed_override);
}

}  // namespace pida2c
