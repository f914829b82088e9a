#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "sinnet/error.hpp"
#include "sinnet/network.hpp"
#include "sinnet/random.hpp"
#include "sinnet/stats.hpp"

using namespace sinnet;

namespace {

NetworkConfig small_config(std::size_t in, std::vector<std::size_t> widths, double omega) {
  NetworkConfig c;
  c.input_dim = in;
  c.hidden_widths = std::move(widths);
  c.omega = omega;
  c.seed = 7;
  return c;
}

SinusoidalNetwork unit_sine_net(double omega) {
  auto cfg = small_config(1, {1}, omega);
  std::vector<LayerParams> layers(2);
  layers[0].weight = Matrix::Constant(1, 1, 1.0);
  layers[0].bias = Vector::Zero(1);
  layers[1].weight = Matrix::Constant(1, 1, 1.0);
  layers[1].bias = Vector::Zero(1);
  return SinusoidalNetwork(cfg, layers);
}

std::vector<double> flatten_weights(const SinusoidalNetwork& net, std::size_t layer) {
  const Matrix& w = net.layer(layer).weight;
  return {w.data(), w.data() + w.size()};
}

}  // namespace

TEST(Random, UniformInUnitInterval) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, NormalMoments) {
  Rng rng(2);
  std::vector<double> v(200000);
  for (double& x : v) x = rng.normal();
  const auto s = summarize(v);
  EXPECT_NEAR(s.mean, 0.0, 0.01);
  EXPECT_NEAR(s.variance, 1.0, 0.01);
}

TEST(Random, BelowIsInRangeAndCoversValues) {
  Rng rng(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) seen[rng.below(7)]++;
  for (int c : seen) EXPECT_GT(c, 800);
}

TEST(NetworkConfig, RejectsDegenerateShapes) {
  auto c = small_config(0, {4}, 1.0);
  EXPECT_THROW(c.validate(), UsageError);
  c = small_config(1, {}, 1.0);
  EXPECT_THROW(c.validate(), UsageError);
  c = small_config(1, {0}, 1.0);
  EXPECT_THROW(c.validate(), UsageError);
  c = small_config(1, {4}, 0.0);
  EXPECT_THROW(c.validate(), UsageError);
  c = small_config(2, {4}, 1.0);
  c.per_axis_scale = {1.0};
  EXPECT_THROW(c.validate(), UsageError);
  c = small_config(1, {4}, 1.0);
  c.init = InitScheme::kSirenUniform;
  c.siren_c = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Init, SameSeedGivesIdenticalParameters) {
  const auto cfg = small_config(3, {16, 16}, 5.0);
  const auto a = init_network(cfg);
  const auto b = init_network(cfg);
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    EXPECT_EQ(a.layer(l).weight, b.layer(l).weight);
    EXPECT_EQ(a.layer(l).bias, b.layer(l).bias);
  }
  auto other = cfg;
  other.seed = 8;
  EXPECT_NE(init_network(other).layer(0).weight, a.layer(0).weight);
}

TEST(Init, KaimingVarianceAtFanIn100) {
  // 10^4 x 100 = 10^6 draws for the second layer.
  auto cfg = small_config(1, {100, 10000}, 1.0);
  const auto net = init_network(cfg);
  const auto s = summarize(flatten_weights(net, 1));
  EXPECT_EQ(s.count, 1000000u);
  EXPECT_NEAR(s.variance, 0.02, 0.0002);
}

TEST(Init, NtkSirenUniformVariance) {
  auto cfg = small_config(1, {1000, 1000}, 1.0);
  cfg.init = InitScheme::kSirenUniform;
  cfg.parametrization = Parametrization::kNtk;
  const auto net = init_network(cfg);
  const auto s = summarize(flatten_weights(net, 1));
  EXPECT_NEAR(s.variance, 2.0, 0.02);
  for (double w : flatten_weights(net, 1)) ASSERT_LE(std::abs(w), std::sqrt(6.0));
}

TEST(Init, PracticalSirenBounds) {
  auto cfg = small_config(2, {64, 64}, 30.0);
  cfg.init = InitScheme::kSirenUniform;
  const auto net = init_network(cfg);
  EXPECT_LE(net.layer(0).weight.cwiseAbs().maxCoeff(), 0.5);
  EXPECT_LE(net.layer(1).weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 64.0) / 30.0);
}

TEST(Forward, ZeroParametersGiveZeroOutput) {
  const auto cfg = small_config(2, {8, 8}, 3.0);
  auto net = init_network(cfg);
  for (auto& l : net.mutable_layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const std::vector<double> x{0.3, -0.7};
  EXPECT_EQ(net.forward(x), Vector::Zero(1));
}

TEST(Forward, SingleUnitClosedForm) {
  const auto net = unit_sine_net(2.0);
  const std::vector<double> x{std::numbers::pi / 4.0};
  EXPECT_NEAR(net.forward(x)(0), 1.0, 1e-15);
}

TEST(Forward, PerAxisScaleEqualsInputRescaling) {
  auto cfg = small_config(2, {16, 16}, 3.0);
  auto base = init_network(cfg);
  auto layers = base.layers();
  layers[0].bias.setZero();
  cfg.per_axis_scale = {2.0, 1.0};
  const SinusoidalNetwork scaled(cfg, layers);
  auto plain_cfg = cfg;
  plain_cfg.per_axis_scale.clear();
  const SinusoidalNetwork plain(plain_cfg, layers);
  const std::vector<double> x{0.3, -0.4};
  const std::vector<double> x2{0.6, -0.4};
  EXPECT_NEAR((scaled.forward(x) - plain.forward(x2)).norm(), 0.0, 1e-13);
}

TEST(Forward, BatchMatchesSingle) {
  const auto net = init_network(small_config(3, {12, 7}, 4.0));
  Matrix x = Matrix::Random(3, 5);
  const Matrix y = net.forward_batch(x);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Vector col = x.col(i);
    EXPECT_NEAR((net.forward({col.data(), 3}) - y.col(i)).norm(), 0.0, 1e-14);
  }
}

TEST(Forward, RejectsWrongInputLength) {
  const auto net = init_network(small_config(2, {4}, 1.0));
  const std::vector<double> x{1.0};
  EXPECT_THROW(net.forward(x), UsageError);
  EXPECT_THROW(net.forward_batch(Matrix::Zero(3, 2)), UsageError);
}

TEST(Forward, NtkParametrizationFormula) {
  auto cfg = small_config(1, {3}, 2.0);
  cfg.parametrization = Parametrization::kNtk;
  const auto net = init_network(cfg);
  const double x = 0.37;
  const auto& l0 = net.layer(0);
  const auto& l1 = net.layer(1);
  double out = l1.bias(0);
  for (int j = 0; j < 3; ++j) {
    const double f0 = 2.0 * (l0.weight(j, 0) * x + l0.bias(j));
    out += l1.weight(0, j) * std::sin(f0) / std::sqrt(3.0);
  }
  const std::vector<double> in{x};
  EXPECT_NEAR(net.forward(in)(0), out, 1e-14);
}

TEST(ActivationStats, MatchesManualMoments) {
  const auto net = init_network(small_config(1, {32, 32}, 1.0));
  Matrix x = Matrix::Random(1, 40);
  const auto stats = activation_stats(net, x);
  ASSERT_EQ(stats.size(), 2u);
  const auto z0 = hidden_preactivations(net, x, 0);
  const auto s = summarize(z0);
  EXPECT_NEAR(stats[0].pre_mean, s.mean, 1e-14);
  EXPECT_NEAR(stats[0].pre_var, s.variance, 1e-14);
  std::size_t total = 0;
  for (auto c : stats[1].post_histogram) total += c;
  EXPECT_EQ(total, 32u * 40u);
}

TEST(ActivationStats, PostSineVarianceOracle) {
  // For z ~ N(0, s), Var[sin z] = (1 - e^{-2 s}) / 2.
  Rng rng(11);
  std::vector<double> v(1000000);
  for (double& x : v) x = std::sin(rng.normal());
  EXPECT_NEAR(summarize(v).variance, (1.0 - std::exp(-2.0)) / 2.0, 0.002);
}

TEST(Stats, PairwiseSumAndMedian) {
  std::vector<double> v(1000, 0.1);
  EXPECT_NEAR(pairwise_sum(v), 100.0, 1e-12);
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(Stats, KolmogorovSmirnov) {
  EXPECT_DOUBLE_EQ(ks_distance({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance({0, 0}, {1, 1}), 1.0);
}

TEST(Stats, Pearson) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 4, 6, 8};
  const std::vector<double> c{4, 3, 2, 1};
  EXPECT_NEAR(pearson_correlation(a, b), 1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(a, c), -1.0, 1e-15);
}
