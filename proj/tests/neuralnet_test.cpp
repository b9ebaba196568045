#include "pida2c/neuralnet.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "test_util.hpp"

using namespace pida2c;

namespace {

// Independent forward pass over an unpacked weight representation; exercises
// the same math through a different code path.
std::vector<double> naive_forward(const Mlp& net, const std::vector<double>& x) {
  std::vector<std::vector<std::vector<double>>> weights;
  std::vector<std::vector<double>> biases;
  std::size_t at = 0;
  for (std::size_t l = 1; l < net.layer_sizes.size(); ++l) {
    const int n_in = net.layer_sizes[l - 1];
    const int n_out = net.layer_sizes[l];
    std::vector<std::vector<double>> w(static_cast<std::size_t>(n_out));
    for (auto& row : w) {
      row.assign(net.params.begin() + static_cast<long>(at),
                 net.params.begin() + static_cast<long>(at + static_cast<std::size_t>(n_in)));
      at += static_cast<std::size_t>(n_in);
    }
    std::vector<double> b(net.params.begin() + static_cast<long>(at),
                          net.params.begin() + static_cast<long>(at + static_cast<std::size_t>(n_out)));
    at += static_cast<std::size_t>(n_out);
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
  std::vector<double> a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    std::vector<double> z(biases[l]);
    for (std::size_t o = 0; o < z.size(); ++o)
      for (std::size_t i = 0; i < a.size(); ++i) z[o] += weights[l][o][i] * a[i];
    if (l + 1 < weights.size())
      for (auto& v : z) v = std::tanh(v);
    a = std::move(z);
  }
  return a;
}

}  // namespace

TEST(Forward, ZeroWeightsGiveZeroOutput) {
  const Mlp net = Mlp::zeros({3, 8, 8, 6});
  for (double v : forward(net, std::vector<double>{0.3, -1.0, 2.0})) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Forward, SingleLayerIdentity) {
  Mlp net = Mlp::zeros({3, 3});
  for (int i = 0; i < 3; ++i) net.params[static_cast<std::size_t>(i * 3 + i)] = 1.0;
  const std::vector<double> x{0.5, -2.0, 7.0};
  const auto y = forward(net, x);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(y[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]);
}

TEST(Forward, MatchesIndependentImplementation) {
  Rng rng(2024);
  const std::vector<std::vector<int>> shapes{
      {3, 16, 16, 1}, {3, 8, 8, 6}, {3, 5, 7, 12}, {2, 4, 3}};
  for (const auto& shape : shapes) {
    const Mlp net = Mlp::seeded(shape, rng.uniform01() > 0.5 ? 1u : 9u);
    std::vector<double> x(static_cast<std::size_t>(shape.front()));
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    const auto a = forward(net, x);
    const auto b = naive_forward(net, x);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Backward, ZeroUpstreamGivesZeroGradient) {
  const Mlp net = Mlp::seeded({3, 8, 8, 6}, 5);
  ForwardCache cache;
  forward(net, std::vector<double>{0.1, 0.2, 0.3}, &cache);
  const auto grad = backward(net, cache, std::vector<double>(6, 0.0));
  for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(Backward, LastLayerGradientIsHiddenActivation) {
  const Mlp net = Mlp::seeded({2, 4, 1}, 77);
  ForwardCache cache;
  forward(net, std::vector<double>{0.4, -0.9}, &cache);
  const auto grad = backward(net, cache, std::vector<double>{1.0});
  // layout: layer-0 block (2+1)*4 = 12, then 4 weights + 1 bias
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(grad[static_cast<std::size_t>(12 + i)], cache.act[0][static_cast<std::size_t>(i)]);
  }
  EXPECT_DOUBLE_EQ(grad[16], 1.0);
}

TEST(Backward, MatchesCentralFiniteDifferences) {
  Rng rng(404);
  const std::vector<std::vector<int>> shapes{
      {3, 10, 10, 1}, {3, 12, 8, 6}, {3, 6, 6, 12}};
  int cases = 0;
  for (const auto& shape : shapes) {
    for (int rep = 0; rep < 7 && cases < 20; ++rep, ++cases) {
      Mlp net = Mlp::seeded(shape, static_cast<std::uint64_t>(1000 + cases));
      std::vector<double> x(static_cast<std::size_t>(shape.front()));
      for (auto& v : x) v = rng.uniform(-1.5, 1.5);
      std::vector<double> upstream(static_cast<std::size_t>(shape.back()));
      for (auto& v : upstream) v = rng.uniform(-1.0, 1.0);

      ForwardCache cache;
      forward(net, x, &cache);
      const auto analytic = backward(net, cache, upstream);

      auto loss = [&]() {
        const auto out = forward(net, x);
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) s += upstream[i] * out[i];
        return s;
      };
      const auto numeric = testutil::finite_diff_grad(net.params, loss, 1e-5);
      EXPECT_LT(testutil::max_grad_mismatch(analytic, numeric), 1e-4)
          << "case " << cases;
    }
  }
  EXPECT_EQ(cases, 20);
}

TEST(Adam, ZeroGradientKeepsParams) {
  std::vector<double> params{1.0, -2.0, 3.0};
  const auto before = params;
  AdamState state(0.01, 3);
  adam_step(params, std::vector<double>(3, 0.0), state);
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  // bias correction makes mhat/sqrt(vhat) = sign(g) on the first step
  std::vector<double> params{0.0, 0.0, 0.0};
  const std::vector<double> grads{0.3, -700.0, 1e-4};
  AdamState state(0.05, 3);
  adam_step(params, grads, state);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double expected =
        -state.lr * grads[i] / (std::abs(grads[i]) + state.eps);
    EXPECT_NEAR(params[i], expected, 1e-15);
  }
}

TEST(Adam, RepeatedStepsMoveAgainstGradient) {
  std::vector<double> params{0.0};
  AdamState state(0.01, 1);
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    adam_step(params, std::vector<double>{2.5}, state);
    EXPECT_LT(params[0], prev);
    prev = params[0];
  }
}

TEST(ClipGradients, ScalesDownToMaxNorm) {
  std::vector<double> g{3.0, 4.0};
  clip_gradients(g, 1.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
}

TEST(ClipGradients, LeavesSmallVectorsUntouched) {
  std::vector<double> g{0.3, 0.4};
  const auto before = g;
  clip_gradients(g, 1.0);
  EXPECT_EQ(g, before);
  std::vector<double> zero{0.0, 0.0};
  clip_gradients(zero, 1.0);
  EXPECT_EQ(zero[0], 0.0);
}

TEST(ClipGradients, PreservesDirection) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> g(8);
    for (auto& v : g) v = rng.uniform(-5.0, 5.0);
    const auto before = g;
    clip_gradients(g, 0.7);
    double norm = 0.0, dot = 0.0, bnorm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      norm += g[i] * g[i];
      dot += g[i] * before[i];
      bnorm += before[i] * before[i];
    }
    EXPECT_LE(std::sqrt(norm), 0.7 + 1e-12);
    EXPECT_NEAR(dot / std::sqrt(norm * bnorm), 1.0, 1e-12);
  }
}

TEST(GaussianLogProb, AnalyticValues) {
  const auto at_mean = gaussian_log_prob(0.7, 0.7, 1.0);
  EXPECT_NEAR(at_mean.log_prob, -0.9189385332046727, 1e-12);
  const auto one_sigma = gaussian_log_prob(1.7, 0.7, 1.0);
  EXPECT_NEAR(one_sigma.log_prob, at_mean.log_prob - 0.5, 1e-12);
}

TEST(GaussianLogProb, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const double mean = rng.uniform(-2.0, 2.0);
    const double sigma = rng.uniform(0.1, 2.0);
    const double value = rng.uniform(-3.0, 3.0);
    const auto g = gaussian_log_prob(value, mean, sigma);
    const double h = 1e-6;
    const double d_mean = (gaussian_log_prob(value, mean + h, sigma).log_prob -
                           gaussian_log_prob(value, mean - h, sigma).log_prob) /
                          (2.0 * h);
    const double d_sigma = (gaussian_log_prob(value, mean, sigma + h).log_prob -
                            gaussian_log_prob(value, mean, sigma - h).log_prob) /
                           (2.0 * h);
    EXPECT_NEAR(g.d_mean, d_mean, 1e-6);
    EXPECT_NEAR(g.d_sigma, d_sigma, 1e-6);
  }
}

TEST(GaussianLogProb, RejectsNonPositiveSigma) {
  EXPECT_THROW(gaussian_log_prob(0.0, 0.0, 0.0), NonPositiveSigmaError);
  EXPECT_THROW(gaussian_log_prob(0.0, 0.0, -1.0), NonPositiveSigmaError);
}

TEST(SigmaHead, PositiveWithFloor) {
  EXPECT_GE(sigma_from_raw(-50.0), kSigmaFloor);
  EXPECT_NEAR(sigma_from_raw(0.0), std::log(2.0) + kSigmaFloor, 1e-12);
  EXPECT_NEAR(sigma_from_raw(30.0), 30.0 + kSigmaFloor, 1e-9);
  // derivative of softplus is the logistic
  const double h = 1e-6;
  const double num = (sigma_from_raw(0.3 + h) - sigma_from_raw(0.3 - h)) / (2 * h);
  EXPECT_NEAR(sigma_from_raw_grad(0.3), num, 1e-9);
}

TEST(Init, SeededAndReproducible) {
  const Mlp a = Mlp::seeded({3, 32, 32, 12}, 42);
  const Mlp b = Mlp::seeded({3, 32, 32, 12}, 42);
  EXPECT_EQ(a.params, b.params);
  const Mlp c = Mlp::seeded({3, 32, 32, 12}, 43);
  EXPECT_NE(a.params, c.params);
  // scale: all params within +-1/sqrt(fan_in) of their layer
  double worst = 0.0;
  for (double p : a.params) worst = std::max(worst, std::abs(p));
  EXPECT_LE(worst, 1.0 / std::sqrt(3.0) + 1e-12);
}

TEST(Checkpoint, RoundTripsBitExact) {
  namespace fs = std::filesystem;
  const Mlp net = Mlp::seeded({3, 16, 16, 6}, 321);
  const auto base = (fs::temp_directory_path() / "pida2c_ckpt_test").string();
  save_checkpoint(net, 321, base);
  const Checkpoint cp = load_checkpoint(base);
  EXPECT_EQ(cp.seed, 321u);
  EXPECT_EQ(cp.net.layer_sizes, net.layer_sizes);
  EXPECT_EQ(cp.net.params, net.params);
  fs::remove(base + ".params.txt");
  fs::remove(base + ".json");
}

TEST(Checkpoint, MissingAndCorruptFilesThrow) {
  namespace fs = std::filesystem;
  EXPECT_THROW(load_checkpoint("/nonexistent/path/net"), CheckpointError);

  const auto base = (fs::temp_directory_path() / "pida2c_ckpt_bad").string();
  const Mlp net = Mlp::seeded({3, 4, 1}, 1);
  save_checkpoint(net, 1, base);
  {
    std::ofstream out(base + ".params.txt", std::ios::trunc);
    out << "1.0\n2.0\n";  // wrong count
  }
  EXPECT_THROW(load_checkpoint(base), CheckpointError);
  fs::remove(base + ".params.txt");
  fs::remove(base + ".json");
}
