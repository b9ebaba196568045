#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pida2c/errors.hpp"
#include "pida2c/rng.hpp"

namespace pida2c {

// Feed-forward network with tanh hidden layers and a linear output layer.
// Parameters live in one flat vector: per layer the weight matrix
// (out x in, row-major) followed by the biases.
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<double> params;

  static int count_params(const std::vector<int>& sizes) {
    int n = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l)
      n += (sizes[l - 1] + 1) * sizes[l];
    return n;
  }

  static Mlp zeros(std::vector<int> sizes) {
    Mlp net;
    net.params.assign(static_cast<std::size_t>(count_params(sizes)), 0.0);
    net.layer_sizes = std::move(sizes);
    return net;
  }

  // Weights and biases uniform in +-1/sqrt(fan_in) per layer.
  static Mlp seeded(std::vector<int> sizes, std::uint64_t seed) {
    Mlp net = zeros(std::move(sizes));
    Rng rng(seed);
    std::size_t at = 0;
    for (std::size_t l = 1; l < net.layer_sizes.size(); ++l) {
      const int fan_in = net.layer_sizes[l - 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      const std::size_t n =
          static_cast<std::size_t>((fan_in + 1) * net.layer_sizes[l]);
      for (std::size_t i = 0; i < n; ++i)
        net.params[at++] = rng.uniform(-bound, bound);
    }
    return net;
  }

  int param_count() const { return static_cast<int>(params.size()); }
  int in_dim() const { return layer_sizes.front(); }
  int out_dim() const { return layer_sizes.back(); }
};

struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> act;  // post-activation per layer
};

inline std::vector<double> forward(const Mlp& net, std::span<const double> x,
                                   ForwardCache* cache = nullptr) {
  std::vector<double> a(x.begin(), x.end());
  if (cache) {
    cache->input = a;
    cache->act.clear();
  }
  std::size_t at = 0;
  const std::size_t last = net.layer_sizes.size() - 1;
  for (std::size_t l = 1; l <= last; ++l) {
    const int n_in = net.layer_sizes[l - 1];
    const int n_out = net.layer_sizes[l];
    const double* w = net.params.data() + at;
    const double* b = w + static_cast<std::size_t>(n_in) * n_out;
    std::vector<double> z(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
      double sum = b[o];
      const double* row = w + static_cast<std::size_t>(o) * n_in;
      for (int i = 0; i < n_in; ++i) sum += row[i] * a[i];
      z[o] = (l == last) ? sum : std::tanh(sum);
    }
    a = std::move(z);
    if (cache) cache->act.push_back(a);
    at += static_cast<std::size_t>(n_in + 1) * n_out;
  }
  return a;
}

// Backprop of a scalar loss whose gradient w.r.t. the network output is
// `upstream`; returns the gradient w.r.t. the flat parameter vector.
inline std::vector<double> backward(const Mlp& net, const ForwardCache& cache,
                                    std::span<const double> upstream) {
  const std::size_t layers = net.layer_sizes.size() - 1;
  std::vector<double> grad(net.params.size(), 0.0);
  std::vector<double> delta(upstream.begin(), upstream.end());

  // Parameter offset of each layer.
  std::vector<std::size_t> offset(layers);
  std::size_t at = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offset[l] = at;
    at += static_cast<std::size_t>(net.layer_sizes[l] + 1) *
          net.layer_sizes[l + 1];
  }

  for (std::size_t l = layers; l-- > 0;) {
    const int n_in = net.layer_sizes[l];
    const int n_out = net.layer_sizes[l + 1];
    const std::vector<double>& input =
        (l == 0) ? cache.input : cache.act[l - 1];
    double* gw = grad.data() + offset[l];
    double* gb = gw + static_cast<std::size_t>(n_in) * n_out;
    for (int o = 0; o < n_out; ++o) {
      double* row = gw + static_cast<std::size_t>(o) * n_in;
      for (int i = 0; i < n_in; ++i) row[i] = delta[o] * input[i];
      gb[o] = delta[o];
    }
    if (l == 0) break;
    const double* w = net.params.data() + offset[l];
    std::vector<double> next(static_cast<std::size_t>(n_in), 0.0);
    for (int o = 0; o < n_out; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * n_in;
      for (int i = 0; i < n_in; ++i) next[i] += row[i] * delta[o];
    }
    // tanh' = 1 - a^2 on the hidden activation feeding this layer
    for (int i = 0; i < n_in; ++i) {
      const double h = cache.act[l - 1][i];
      next[i] *= 1.0 - h * h;
    }
    delta = std::move(next);
  }
  return grad;
}

struct AdamState {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m, v;
  long step = 0;

  AdamState(double learning_rate, int n_params)
      : lr(learning_rate),
        m(static_cast<std::size_t>(n_params), 0.0),
        v(static_cast<std::size_t>(n_params), 0.0) {}
};

inline void adam_step(std::span<double> params, std::span<const double> grads,
                      AdamState& state) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] =
        state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// Global-norm clipping: scale down so the L2 norm is at most max_norm.
inline void clip_gradients(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (double& g : grads) g *= scale;
}

struct GaussianLogProb {
  double log_prob;
  double d_mean;
  double d_sigma;
};

inline GaussianLogProb gaussian_log_prob(double value, double mean,
                                         double sigma) {
  if (!(sigma > 0.0))
    throw NonPositiveSigmaError("gaussian_log_prob: sigma must be positive");
  constexpr double kLog2Pi = 1.8378770664093454836;
  const double z = value - mean;
  const double s2 = sigma * sigma;
  return {-0.5 * kLog2Pi - std::log(sigma) - 0.5 * z * z / s2,
          z / s2,
          (z * z - s2) / (s2 * sigma)};
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline constexpr double kSigmaFloor = 1e-4;

// Standard-deviation head: softplus keeps sigma positive, the floor keeps the
// log-prob gradients finite.
inline double sigma_from_raw(double raw) { return softplus(raw) + kSigmaFloor; }
inline double sigma_from_raw_grad(double raw) { return logistic(raw); }

// Checkpoints: <base>.params.txt holds one decimal per line (round-trip
// exact), <base>.json records layer sizes and the init seed.
inline void save_checkpoint(const Mlp& net, std::uint64_t seed,
                            const std::string& base_path) {
  const std::string params_path = base_path + ".params.txt";
  std::ofstream out(params_path);
  if (!out) throw IoError(params_path, "cannot open for writing");
  char buf[64];
  for (double p : net.params) {
    std::snprintf(buf, sizeof buf, "%.17g\n", p);
    out << buf;
  }
  if (!out) throw IoError(params_path, "write failed");
  out.close();

  nlohmann::json meta;
  meta["layer_sizes"] = net.layer_sizes;
  meta["seed"] = seed;
  const std::string meta_path = base_path + ".json";
  std::ofstream meta_out(meta_path);
  if (!meta_out) throw IoError(meta_path, "cannot open for writing");
  meta_out << meta.dump(2) << "\n";
}

struct Checkpoint {
  Mlp net;
  std::uint64_t seed = 0;
};

inline Checkpoint load_checkpoint(const std::string& base_path) {
  const std::string meta_path = base_path + ".json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw CheckpointError("missing checkpoint sidecar: " + meta_path);
  Checkpoint cp;
  try {
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    cp.net.layer_sizes = meta.at("layer_sizes").get<std::vector<int>>();
    cp.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("corrupt checkpoint sidecar " + meta_path + ": " +
                          e.what());
  }
  if (cp.net.layer_sizes.size() < 2)
    throw CheckpointError("corrupt checkpoint: bad layer sizes in " + meta_path);

  const std::string params_path = base_path + ".params.txt";
  std::ifstream in(params_path);
  if (!in) throw CheckpointError("missing checkpoint params: " + params_path);
  const int expected = Mlp::count_params(cp.net.layer_sizes);
  cp.net.params.reserve(static_cast<std::size_t>(expected));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t pos = 0;
    double value = 0.0;
    try {
      value = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw CheckpointError("corrupt checkpoint value in " + params_path);
    }
    cp.net.params.push_back(value);
  }
  if (cp.net.param_count() != expected)
    throw CheckpointError("corrupt checkpoint: parameter count mismatch in " +
                          params_path);
  return cp;
}

}  // namespace pida2c
