#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pida2c/control.hpp"
#include "pida2c/neuralnet.hpp"
#include "pida2c/rng.hpp"

namespace pida2c {

// Scaling ceilings applied to the squashed policy samples, one per gain type.
struct GainBounds {
  double kp = 1000.0;
  double ki = 1.0;
  double kd = 100.0;
};

struct AgentConfig {
  double actor_lr = 5e-5;
  double critic_lr = 1e-5;
  double discount = 0.0;  // kept for schema stability; one-step TD has no next state
  GainBounds bounds;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  int tuned_joint_count = 2;
  std::array<int, 2> hidden{256, 256};

  void validate() const {
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
      throw std::invalid_argument("learning rates must be positive");
    if (discount < 0.0 || discount > 1.0)
      throw std::invalid_argument("discount must be in [0, 1]");
    if (!(clip_norm > 0.0))
      throw std::invalid_argument("clip_norm must be positive");
    if (tuned_joint_count < 1 || tuned_joint_count > 2)
      throw std::invalid_argument("tuned_joint_count must be 1 or 2");
    if (!(bounds.kp > 0.0) || !(bounds.ki > 0.0) || !(bounds.kd > 0.0))
      throw std::invalid_argument("gain bounds must be positive");
  }
};

// One policy draw: the raw Gaussian samples, their squashed PID gains, and
// the total log density of the raw samples.
struct ActionSample {
  std::vector<double> raw;
  std::vector<double> mean;   // policy stats at sampling time
  std::vector<double> sigma;
  std::vector<PidGains> gains;  // per tuned joint
  double log_prob = 0.0;
};

// Squash each raw sample through the logistic and scale to the gain ceiling.
// Raw order per joint: kp, ki, kd.
inline std::vector<PidGains> scale_action(std::span<const double> raw,
                                          const GainBounds& bounds) {
  if (raw.size() % 3 != 0)
    throw std::invalid_argument("scale_action: need 3 raw values per joint");
  std::vector<PidGains> gains(raw.size() / 3);
  for (std::size_t j = 0; j < gains.size(); ++j) {
    gains[j].kp = bounds.kp * logistic(raw[3 * j + 0]);
    gains[j].ki = bounds.ki * logistic(raw[3 * j + 1]);
    gains[j].kd = bounds.kd * logistic(raw[3 * j + 2]);
  }
  return gains;
}

// One-step TD error with the next-state term dropped: every episode is a
// single step, so the advantage estimate is just r - V(s).
inline double td_error(double reward, double value) { return reward - value; }

// Actor head layout: the first half of the outputs are the per-gain means,
// the second half the raw standard deviations (softplus + floor applied).
inline ActionSample sample_action(const Mlp& actor,
                                  std::span<const double> state,
                                  const GainBounds& bounds, Rng& rng) {
  const auto out = forward(actor, state);
  const std::size_t n_gains = out.size() / 2;
  ActionSample a;
  a.raw.resize(n_gains);
  a.mean.resize(n_gains);
  a.sigma.resize(n_gains);
  for (std::size_t i = 0; i < n_gains; ++i) {
    a.mean[i] = out[i];
    a.sigma[i] = sigma_from_raw(out[n_gains + i]);
    a.raw[i] = rng.normal(a.mean[i], a.sigma[i]);
    a.log_prob += gaussian_log_prob(a.raw[i], a.mean[i], a.sigma[i]).log_prob;
  }
  a.gains = scale_action(a.raw, bounds);
  return a;
}

// Deterministic evaluation: take the policy means, skip sampling.
inline std::vector<PidGains> greedy_action(const Mlp& actor,
                                           std::span<const double> state,
                                           const GainBounds& bounds) {
  const auto out = forward(actor, state);
  return scale_action(std::span(out).first(out.size() / 2), bounds);
}

// Total log density of the raw samples under the actor's current policy.
inline double action_log_prob(const Mlp& actor, std::span<const double> state,
                              std::span<const double> raw) {
  const auto out = forward(actor, state);
  const std::size_t n_gains = out.size() / 2;
  double lp = 0.0;
  for (std::size_t i = 0; i < n_gains; ++i) {
    lp += gaussian_log_prob(raw[i], out[i], sigma_from_raw(out[n_gains + i]))
              .log_prob;
  }
  return lp;
}

// Gradient of the critic loss delta^2 w.r.t. the critic parameters, with
// delta treated as V-dependent: d(delta^2)/dw = -2*delta * dV/dw.
inline std::vector<double> critic_loss_gradient(const Mlp& critic,
                                                std::span<const double> state,
                                                double delta) {
  ForwardCache cache;
  forward(critic, state, &cache);
  const std::array<double, 1> upstream{-2.0 * delta};
  return backward(critic, cache, upstream);
}

// Gradient of the actor loss -log pi(raw|s) * delta, delta held constant.
// The log-prob is taken on the raw pre-squash sample.
inline std::vector<double> actor_loss_gradient(const Mlp& actor,
                                               std::span<const double> state,
                                               std::span<const double> raw,
                                               double delta) {
  ForwardCache cache;
  const auto out = forward(actor, state, &cache);
  const std::size_t n_gains = out.size() / 2;
  std::vector<double> upstream(out.size(), 0.0);
  for (std::size_t i = 0; i < n_gains; ++i) {
    const double sigma = sigma_from_raw(out[n_gains + i]);
    const auto lp = gaussian_log_prob(raw[i], out[i], sigma);
    upstream[i] = -delta * lp.d_mean;
    upstream[n_gains + i] =
        -delta * lp.d_sigma * sigma_from_raw_grad(out[n_gains + i]);
  }
  return backward(actor, cache, upstream);
}

// A zero TD error leaves the parameters bit-identical.
inline void update_critic(Mlp& critic, AdamState& opt,
                          std::span<const double> state, double delta,
                          double clip_norm) {
  if (delta == 0.0) return;
  auto grads = critic_loss_gradient(critic, state, delta);
  clip_gradients(grads, clip_norm);
  adam_step(critic.params, grads, opt);
}

inline void update_actor(Mlp& actor, AdamState& opt,
                         std::span<const double> state,
                         const ActionSample& action, double delta,
                         double clip_norm) {
  if (delta == 0.0) return;
  auto grads = actor_loss_gradient(actor, state, action.raw, delta);
  clip_gradients(grads, clip_norm);
  adam_step(actor.params, grads, opt);
}

struct ReinforceStep {
  std::vector<double> state;
  std::vector<double> raw;  // pre-squash action sample
  double reward = 0.0;
};

// Gradient of -(sum of log pi) * (total reward) over a trajectory.
inline std::vector<double> reinforce_loss_gradient(
    const Mlp& actor, std::span<const ReinforceStep> trajectory) {
  if (trajectory.empty())
    throw std::invalid_argument("reinforce gradient: empty trajectory");
  double total_reward = 0.0;
  for (const auto& step : trajectory) total_reward += step.reward;
  std::vector<double> grads(actor.params.size(), 0.0);
  if (total_reward == 0.0) return grads;
  for (const auto& step : trajectory) {
    const auto g =
        actor_loss_gradient(actor, step.state, step.raw, total_reward);
    for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += g[k];
  }
  return grads;
}

// Monte Carlo policy-gradient step on the whole trajectory, sharing the
// clip + Adam machinery of the actor update so the single-step case reduces
// to it exactly. Zero total reward is a no-op.
inline void reinforce_update(Mlp& actor, AdamState& opt,
                             std::span<const ReinforceStep> trajectory,
                             double clip_norm) {
  double total_reward = 0.0;
  for (const auto& step : trajectory) total_reward += step.reward;
  if (total_reward == 0.0 && !trajectory.empty()) return;
  auto grads = reinforce_loss_gradient(actor, trajectory);
  clip_gradients(grads, clip_norm);
  adam_step(actor.params, grads, opt);
}

// Owns the actor/critic pair plus optimizer state; training is a strictly
// sequential sample -> act -> reward -> update loop.
class A2cAgent {
 public:
  explicit A2cAgent(const AgentConfig& config)
      : config_(config),
        actor_(Mlp::seeded({3, config.hidden[0], config.hidden[1],
                            6 * config.tuned_joint_count},
                           mix_seed(config.seed, 0))),
        critic_(Mlp::seeded({3, config.hidden[0], config.hidden[1], 1},
                            mix_seed(config.seed, 1))),
        actor_opt_(config.actor_lr, actor_.param_count()),
        critic_opt_(config.critic_lr, critic_.param_count()) {
    config.validate();
  }

  ActionSample act(std::span<const double> state, Rng& rng) {
    return sample_action(actor_, state, config_.bounds, rng);
  }

  std::vector<PidGains> act_greedy(std::span<const double> state) const {
    return greedy_action(actor_, state, config_.bounds);
  }

  double value(std::span<const double> state) const {
    return forward(critic_, state)[0];
  }

  struct LearnResult {
    double value = 0.0;
    double delta = 0.0;
  };

  // Critic first, then actor, both driven by the pre-update TD error.
  LearnResult learn(std::span<const double> state, const ActionSample& action,
                    double reward) {
    LearnResult r;
    r.value = value(state);
    r.delta = td_error(reward, r.value);
    update_critic(critic_, critic_opt_, state, r.delta, config_.clip_norm);
    update_actor(actor_, actor_opt_, state, action, r.delta, config_.clip_norm);
    return r;
  }

  const AgentConfig& config() const { return config_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }

  std::uint64_t actor_init_seed() const { return mix_seed(config_.seed, 0); }
  std::uint64_t critic_init_seed() const { return mix_seed(config_.seed, 1); }

 private:
  AgentConfig config_;
  Mlp actor_;
  Mlp critic_;
  AdamState actor_opt_;
  AdamState critic_opt_;
};

}  // namespace pida2c
