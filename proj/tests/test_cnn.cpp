#include "polsar/cnn.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace polsar;
using namespace polsar::cnn;

namespace {

CompactCnn zero_net(const NetworkConfig& cfg) {
  return CompactCnn(cfg, std::vector<double>(parameter_count(cfg), 0.0));
}

Patch random_patch(std::mt19937_64& gen, int channels, int window) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Patch p(channels, window);
  for (double& v : p.data) {
    v = u(gen);
  }
  return p;
}

NetworkConfig two_layer_config() {
  NetworkConfig cfg = NetworkConfig::compact_default(6, 9, 3, 21);
  cfg.cnn_layers = {ConvLayerSpec{20, 3, 3, 2, 2}, ConvLayerSpec{20, 3, 3, 2, 2}};
  return cfg;
}

}  // namespace

TEST(ValidConv2d, Examples) {
  std::mt19937_64 gen(1);
  const auto in = testsupport::random_map(gen, 4, 6);
  const auto out = valid_conv2d(Map(1, 1, 2.0), in);
  ASSERT_EQ(out.rows, 4);
  ASSERT_EQ(out.cols, 6);
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    EXPECT_EQ(out.data[i], 2.0 * in.data[i]);
  }
  const auto nine = valid_conv2d(Map(3, 3, 1.0), Map(3, 3, 1.0));
  ASSERT_EQ(nine.rows, 1);
  ASSERT_EQ(nine.cols, 1);
  EXPECT_EQ(nine.data[0], 9.0);
}

TEST(ValidConv2d, MatchesNaiveLoops) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = testsupport::random_map(gen, 3, 3);
    const auto in = testsupport::random_map(gen, 5, 5);
    EXPECT_EQ(valid_conv2d(k, in), testsupport::naive_conv(k, in));
    const auto k2 = testsupport::random_map(gen, 2, 4);
    const auto in2 = testsupport::random_map(gen, 7, 5);
    EXPECT_EQ(valid_conv2d(k2, in2), testsupport::naive_conv(k2, in2));
  }
}

TEST(ValidConv2d, KernelLargerThanInputThrows) {
  EXPECT_THROW((void)valid_conv2d(Map(4, 1), Map(3, 3)), std::invalid_argument);
  EXPECT_THROW((void)valid_conv2d(Map(1, 4), Map(3, 3)), std::invalid_argument);
}

TEST(Subsample, Examples) {
  const auto c = subsample(Map(6, 4, 2.5), 3, 2);
  EXPECT_EQ(c.rows, 2);
  EXPECT_EQ(c.cols, 2);
  for (double v : c.data) {
    EXPECT_DOUBLE_EQ(v, 2.5);
  }
  Map m(2, 2);
  m.data = {1, 3, 5, 7};
  const auto p = subsample(m, 2, 2);
  ASSERT_EQ(p.data.size(), 1U);
  EXPECT_EQ(p.data[0], 4.0);

  std::mt19937_64 gen(3);
  const auto r = testsupport::random_map(gen, 5, 7);
  const auto g = subsample(r, 5, 7);
  double mean = 0.0;
  for (double v : r.data) {
    mean += v / 35.0;
  }
  EXPECT_NEAR(g.data[0], mean, 1e-15);
}

TEST(Subsample, DropsTrailingCellsAndRejectsLargeFactors) {
  Map m(5, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      m(r, c) = r * 5 + c;
    }
  }
  const auto p = subsample(m, 2, 2);
  ASSERT_EQ(p.rows, 2);
  ASSERT_EQ(p.cols, 2);
  EXPECT_DOUBLE_EQ(p(0, 0), (0 + 1 + 5 + 6) / 4.0);
  EXPECT_DOUBLE_EQ(p(1, 1), (12 + 13 + 17 + 18) / 4.0);
  EXPECT_THROW((void)subsample(m, 6, 1), std::invalid_argument);
  EXPECT_THROW((void)subsample(m, 0, 1), std::invalid_argument);
}

TEST(NetworkConfig, ValidationAndShapes) {
  auto cfg = NetworkConfig::compact_default(3, 7, 4);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.cnn_layers.size(), 1U);
  EXPECT_EQ(cfg.cnn_layers[0], (ConvLayerSpec{20, 3, 3, 2, 2}));
  EXPECT_EQ(cfg.mlp_layers, std::vector<int>{10});
  EXPECT_EQ(cfg.conv_output_dims(), (std::vector<std::pair<int, int>>{{5, 5}}));

  auto even = cfg;
  even.window = 8;
  EXPECT_THROW(even.validate(), std::invalid_argument);
  auto one_class = cfg;
  one_class.num_classes = 1;
  EXPECT_THROW(one_class.validate(), std::invalid_argument);
  auto no_cnn = cfg;
  no_cnn.cnn_layers.clear();
  EXPECT_THROW(no_cnn.validate(), std::invalid_argument);
  auto too_deep = cfg;
  too_deep.window = 5;
  too_deep.cnn_layers.assign(3, ConvLayerSpec{});
  EXPECT_THROW(too_deep.validate(), std::invalid_argument);
}

TEST(NetworkConfig, Multipliers) {
  const auto base = NetworkConfig::compact_default(3, 21, 4);
  const auto big = base.scaled(4, 2);
  ASSERT_EQ(big.cnn_layers.size(), 2U);
  EXPECT_EQ(big.cnn_layers[0].neurons, 80);
  EXPECT_EQ(big.cnn_layers[1].neurons, 80);
  EXPECT_EQ(big.mlp_layers, std::vector<int>{40});
  EXPECT_EQ(big.num_classes, 4);
  EXPECT_EQ(base.scaled(1, 1), base);
  EXPECT_THROW((void)base.scaled(0, 1), std::invalid_argument);
}

TEST(ParameterLayout, CountsMatchArchitecture) {
  const auto cfg = NetworkConfig::compact_default(3, 7, 4);
  // CNN: 20 * (3 * 9 + 1); MLP hidden: 10 * (20 + 1); output: 4 * (10 + 1)
  EXPECT_EQ(parameter_count(cfg), 20U * 28U + 10U * 21U + 4U * 11U);
  auto net = zero_net(cfg);
  EXPECT_EQ(net.cnn_offset(0, 1), 28U);
  EXPECT_EQ(net.mlp_offset(0, 0), 560U);
  EXPECT_EQ(net.mlp_offset(1, 0), 560U + 210U);
  EXPECT_EQ(net.mlp_input_count(0), 20);
  EXPECT_EQ(net.mlp_input_count(1), 10);
  net.kernel(0, 1, 2)[4] = 7.0;
  EXPECT_EQ(net.parameters()[28 + 2 * 9 + 4], 7.0);
  net.cnn_bias(0, 1) = 3.0;
  EXPECT_EQ(net.parameters()[28 + 27], 3.0);
  net.mlp_weight(1, 2, 3) = 5.0;
  EXPECT_EQ(net.parameters()[770 + 2 * 11 + 3], 5.0);
  net.mlp_bias(1, 2) = 6.0;
  EXPECT_EQ(net.parameters()[770 + 2 * 11 + 10], 6.0);
  EXPECT_THROW(CompactCnn(cfg, std::vector<double>(5)), std::invalid_argument);
}

TEST(Forward, ZeroWeightsGiveZeroScores) {
  std::mt19937_64 gen(4);
  const auto cfg = NetworkConfig::compact_default(3, 7, 5);
  const auto scores = zero_net(cfg).forward(random_patch(gen, 3, 7));
  ASSERT_EQ(scores.size(), 5U);
  for (double s : scores) {
    EXPECT_EQ(s, 0.0);
  }
}

TEST(Forward, HandComputedChain) {
  NetworkConfig cfg;
  cfg.input_channels = 1;
  cfg.window = 5;
  cfg.cnn_layers = {ConvLayerSpec{1, 3, 3, 2, 2}};
  cfg.mlp_layers = {};
  cfg.num_classes = 2;
  auto net = zero_net(cfg);
  for (double& w : net.kernel(0, 0, 0)) {
    w = 1.0;
  }
  net.mlp_weight(0, 0, 0) = 1.0;
  Patch patch(1, 5);
  std::fill(patch.data.begin(), patch.data.end(), 1.0);
  ForwardTrace trace;
  const auto scores = net.forward(patch, trace);
  ASSERT_EQ(trace.cnn.size(), 1U);
  const auto& layer = trace.cnn[0];
  ASSERT_EQ(layer.x[0].rows, 3);
  for (double v : layer.x[0].data) {
    EXPECT_EQ(v, 9.0);
  }
  for (double v : layer.y[0].data) {
    EXPECT_EQ(v, std::tanh(9.0));
  }
  // The output CNN layer pools its full 3x3 map despite the configured 2x2.
  EXPECT_EQ(layer.pool_rows, 3);
  EXPECT_EQ(layer.pool_cols, 3);
  ASSERT_EQ(layer.s[0].data.size(), 1U);
  EXPECT_NEAR(layer.s[0].data[0], std::tanh(9.0), 1e-15);
  EXPECT_NEAR(scores[0], std::tanh(std::tanh(9.0)), 1e-15);
  EXPECT_EQ(scores[1], 0.0);
}

TEST(Forward, IdentityActivationIsAffine) {
  std::mt19937_64 gen(5);
  auto cfg = NetworkConfig::compact_default(2, 7, 3, 8);
  cfg.activation = Activation::identity;
  const auto net = init_weights(cfg);
  const auto a = random_patch(gen, 2, 7);
  const auto b = random_patch(gen, 2, 7);
  Patch mid(2, 7);
  for (std::size_t i = 0; i < mid.data.size(); ++i) {
    mid.data[i] = 0.5 * (a.data[i] + b.data[i]);
  }
  const auto sa = net.forward(a);
  const auto sb = net.forward(b);
  const auto sm = net.forward(mid);
  for (std::size_t k = 0; k < sm.size(); ++k) {
    EXPECT_NEAR(sm[k], 0.5 * (sa[k] + sb[k]), 1e-12);
  }
}

TEST(Forward, ShapeMismatchThrows) {
  const auto net = init_weights(NetworkConfig::compact_default(3, 7, 4));
  EXPECT_THROW((void)net.forward(Patch(3, 9)), std::invalid_argument);
  EXPECT_THROW((void)net.forward(Patch(2, 7)), std::invalid_argument);
}

TEST(Forward, OutputLengthIndependentOfDepth) {
  std::mt19937_64 gen(6);
  for (int depth = 1; depth <= 3; ++depth) {
    NetworkConfig cfg = NetworkConfig::compact_default(4, 21, 5, 2);
    cfg.cnn_layers.assign(static_cast<std::size_t>(depth), ConvLayerSpec{6, 3, 3, 2, 2});
    const auto scores = init_weights(cfg).forward(random_patch(gen, 4, 21));
    EXPECT_EQ(scores.size(), 5U) << "depth " << depth;
  }
}

TEST(MseLoss, Examples) {
  const auto t = encode_target(2, 5);
  EXPECT_EQ(t, (std::vector<double>{-1, -1, 1, -1, -1}));
  EXPECT_EQ(mse_loss(t, 2), 0.0);
  EXPECT_EQ(mse_loss(std::vector<double>(5, 0.0), 2), 5.0);
  std::vector<double> neg(t);
  for (double& v : neg) {
    v = -v;
  }
  EXPECT_EQ(mse_loss(neg, 2), 20.0);
  EXPECT_THROW((void)mse_loss(t, 5), std::invalid_argument);
  EXPECT_THROW((void)mse_loss(t, -1), std::invalid_argument);
  EXPECT_THROW((void)encode_target(3, 3), std::invalid_argument);
}

TEST(MseLoss, NonNegativeZeroOnlyAtTarget) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s(4);
    for (double& v : s) {
      v = u(gen);
    }
    EXPECT_GT(mse_loss(s, i % 4), 0.0);
  }
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{0.1, 0.5, 0.5, -1.0}), 1);
  EXPECT_EQ(argmax(std::vector<double>{0.0, 0.0}), 0);
  EXPECT_EQ(argmax(std::vector<double>{-3.0, -2.0, -2.5}), 1);
}

TEST(Backward, ZeroWhenScoresEqualTarget) {
  // Identity activation with zero weights and biases set to the target.
  auto cfg = NetworkConfig::compact_default(2, 5, 3);
  cfg.activation = Activation::identity;
  auto net = zero_net(cfg);
  const auto t = encode_target(1, 3);
  for (int k = 0; k < 3; ++k) {
    net.mlp_bias(1, k) = t[static_cast<std::size_t>(k)];
  }
  std::mt19937_64 gen(8);
  const auto patch = random_patch(gen, 2, 5);
  ASSERT_EQ(net.forward(patch), t);
  for (double g : backward(net, patch, 1)) {
    EXPECT_EQ(g, 0.0);
  }
}

TEST(Backward, TraceOverloadMatchesConvenienceOverload) {
  const auto c = random_gradient_case(NetworkConfig::compact_default(3, 7, 4), 3);
  ForwardTrace trace;
  const double loss = mse_loss(c.net.forward(c.patch, trace), c.target_class);
  std::vector<double> g(c.net.parameter_count());
  EXPECT_EQ(backward(c.net, trace, c.target_class, g), loss);
  EXPECT_EQ(g, backward(c.net, c.patch, c.target_class));
}

TEST(GradientCheck, DefaultConfigMatchesFiniteDifferences) {
  const auto cfg = NetworkConfig::compact_default(3, 7, 4);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto c = random_gradient_case(cfg, seed);
    const auto report = gradient_check(c.net, c.patch, c.target_class);
    EXPECT_EQ(report.parameter_count, parameter_count(cfg));
    EXPECT_LT(report.max_relative_error, 1e-6) << "seed " << seed;
  }
}

TEST(GradientCheck, SixChannelTwoCnnLayers) {
  const auto cfg = two_layer_config();
  const auto c = random_gradient_case(cfg, 4);
  EXPECT_LT(gradient_check(c.net, c.patch, c.target_class).max_relative_error, 1e-6);
}

TEST(GradientCheck, UnevenKernelsSubsamplingAndNoHiddenMlp) {
  NetworkConfig cfg;
  cfg.input_channels = 2;
  cfg.window = 11;
  cfg.cnn_layers = {ConvLayerSpec{4, 3, 2, 2, 3}, ConvLayerSpec{3, 2, 2, 1, 1}};
  cfg.mlp_layers = {};
  cfg.num_classes = 3;
  cfg.validate();
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    const auto c = random_gradient_case(cfg, seed);
    EXPECT_LT(gradient_check(c.net, c.patch, c.target_class).max_relative_error, 1e-6);
  }
}

TEST(GradientCheck, AgreesWithPureRelativeErrorOnLargeGradients) {
  // Independent of the max(1, .) convention: entries with |g| > 1e-2 must
  // match finite differences to 1e-6 in plain relative terms.
  const auto c = random_gradient_case(NetworkConfig::compact_default(3, 7, 4), 7);
  const auto g = backward(c.net, c.patch, c.target_class);
  CompactCnn probe = c.net;
  auto p = probe.parameters();
  int checked = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(g[i]) < 1e-2) {
      continue;
    }
    const double saved = p[i];
    p[i] = saved + 1e-6;
    const double plus = mse_loss(probe.forward(c.patch), c.target_class);
    p[i] = saved - 1e-6;
    const double minus = mse_loss(probe.forward(c.patch), c.target_class);
    p[i] = saved;
    const double numeric = (plus - minus) / 2e-6;
    EXPECT_LT(std::abs(numeric - g[i]) / std::abs(g[i]), 1e-6) << "parameter " << i;
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(GradientStep, SmallStepDoesNotIncreaseLoss) {
  const auto cfg = NetworkConfig::compact_default(3, 7, 4);
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    auto c = random_gradient_case(cfg, seed);
    const double before = mse_loss(c.net.forward(c.patch), c.target_class);
    const auto g = backward(c.net, c.patch, c.target_class);
    auto p = c.net.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= 1e-5 * g[i];
    }
    EXPECT_LE(mse_loss(c.net.forward(c.patch), c.target_class), before);
  }
}

TEST(InitWeights, DeterministicBoundedAndSeedSensitive) {
  auto cfg = NetworkConfig::compact_default(3, 9, 4, 42);
  const auto a = init_weights(cfg);
  const auto b = init_weights(cfg);
  EXPECT_EQ(a, b);
  for (double p : a.parameters()) {
    EXPECT_GE(p, -0.1);
    EXPECT_LE(p, 0.1);
  }
  cfg.seed = 43;
  const auto c = init_weights(cfg);
  EXPECT_NE(std::vector<double>(a.parameters().begin(), a.parameters().end()),
            std::vector<double>(c.parameters().begin(), c.parameters().end()));
}

TEST(GradientRelativeError, Convention) {
  EXPECT_EQ(gradient_relative_error(1e-9, 2e-9), 1e-9);
  EXPECT_DOUBLE_EQ(gradient_relative_error(10.0, 11.0), 1.0 / 11.0);
  EXPECT_EQ(gradient_relative_error(0.0, 0.0), 0.0);
}
