#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "sinnet/error.hpp"
#include "sinnet/random.hpp"
#include "sinnet/trainer.hpp"

using namespace sinnet;

namespace {

NetworkConfig small_net(std::size_t in, std::size_t out, double omega = 2.0, std::uint64_t seed = 1) {
  NetworkConfig c;
  c.input_dim = in;
  c.output_dim = out;
  c.hidden_widths = {6, 5};
  c.omega = omega;
  c.seed = seed;
  return c;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

// Central differences of the loss on a handful of parameters per layer.
void check_gradient(Task task, const NetworkConfig& cfg, const Matrix& pts, const Matrix& tgt,
                    std::vector<double> lambdas = {}) {
  SinusoidalNetwork net = init_network(cfg);
  const LossResult base = compute_loss(task, net, pts, tgt, lambdas);
  const double h = 1e-6;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (int which = 0; which < 2; ++which) {
      for (Eigen::Index k = 0; k < 3; ++k) {
        auto& layer = net.mutable_layers()[l];
        double* p = which == 0 ? &layer.weight.data()[k % layer.weight.size()] : &layer.bias.data()[k % layer.bias.size()];
        const double saved = *p;
        *p = saved + h;
        const double up = compute_loss(task, net, pts, tgt, lambdas).loss;
        *p = saved - h;
        const double down = compute_loss(task, net, pts, tgt, lambdas).loss;
        *p = saved;
        const double fd = (up - down) / (2 * h);
        const auto& g = base.grads.layers[l];
        const double an = which == 0 ? g.weight.data()[k % g.weight.size()] : g.bias.data()[k % g.bias.size()];
        EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd))) << to_string(task) << " layer " << l;
      }
    }
  }
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    auto lp = lambdas, lm = lambdas;
    lp[j] += h;
    lm[j] -= h;
    const double fd = (compute_loss(task, net, pts, tgt, lp).loss - compute_loss(task, net, pts, tgt, lm).loss) / (2 * h);
    EXPECT_NEAR(base.lambda_grads[j], fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

}  // namespace

TEST(Loss, GradientsMatchFiniteDifferences) {
  check_gradient(Task::kFit, small_net(2, 2), random_matrix(2, 9, 1), random_matrix(2, 9, 2));
  check_gradient(Task::kPoissonGrad, small_net(2, 1), random_matrix(2, 9, 3), random_matrix(2, 9, 4));
  check_gradient(Task::kPoissonLap, small_net(2, 1), random_matrix(2, 9, 5), random_matrix(1, 9, 6));
  check_gradient(Task::kBurgersIdent, small_net(2, 1), random_matrix(2, 9, 7), random_matrix(1, 9, 8), {0.7, 0.05});
}

TEST(Loss, PerfectFitHasZeroLossAndGradient) {
  const auto net = init_network(small_net(1, 1));
  const Matrix pts = random_matrix(1, 12, 3);
  const auto r = compute_loss(Task::kFit, net, pts, net.forward_batch(pts));
  EXPECT_EQ(r.loss, 0.0);
  for (const auto& l : r.grads.layers) {
    EXPECT_EQ(l.weight.norm(), 0.0);
    EXPECT_EQ(l.bias.norm(), 0.0);
  }
}

TEST(Loss, PoissonOfConstantNetworkIsTargetEnergy) {
  // A network with a zero output layer has zero gradient and Laplacian.
  auto net = init_network(small_net(2, 1));
  net.mutable_layers().back().weight.setZero();
  const Matrix pts = random_matrix(2, 10, 2);
  const Matrix tgt = random_matrix(2, 10, 3);
  EXPECT_NEAR(compute_loss(Task::kPoissonGrad, net, pts, tgt).loss, tgt.squaredNorm() / 20.0, 1e-14);
  EXPECT_EQ(compute_loss(Task::kPoissonLap, net, pts, Matrix::Zero(1, 10)).loss, 0.0);
}

TEST(Loss, BurgersResidualVanishesForSteadyState) {
  // u = 0 solves Burgers for any lambda; a zero output layer gives u = 0.
  auto net = init_network(small_net(2, 1));
  net.mutable_layers().back().weight.setZero();
  net.mutable_layers().back().bias.setZero();
  const std::vector<double> lam{1.0, kBurgersNu};
  const auto r = compute_loss(Task::kBurgersIdent, net, random_matrix(2, 16, 4), Matrix::Zero(1, 16), lam);
  EXPECT_LT(r.loss, 1e-5);
}

TEST(Loss, RejectsMismatchedShapes) {
  const auto net = init_network(small_net(2, 1));
  EXPECT_THROW(compute_loss(Task::kFit, net, random_matrix(2, 4, 1), random_matrix(2, 4, 1)), UsageError);
  EXPECT_THROW(compute_loss(Task::kBurgersIdent, net, random_matrix(2, 4, 1), random_matrix(1, 4, 1)), UsageError);
  EXPECT_THROW(compute_loss(Task::kFit, net, Matrix(2, 0), Matrix(1, 0)), DataError);
}

TEST(Evaluate, Psnr) {
  EXPECT_TRUE(std::isinf(metrics_from_mse(0.0).psnr));
  EXPECT_NEAR(metrics_from_mse(0.01).psnr, 20.0, 1e-12);
  EXPECT_NEAR(metrics_from_mse(1.0).psnr, 0.0, 1e-12);
  EXPECT_EQ(json_number(INFINITY), "inf");
  EXPECT_EQ(json_number(1.5), 1.5);
}

TEST(SpectralNorm, MatchesSvd) {
  const Matrix w = random_matrix(20, 7, 5);
  const double truth = Eigen::JacobiSVD<Matrix>(w).singularValues()(0);
  EXPECT_NEAR(spectral_norm(w, 200, 1e-12), truth, 1e-8 * truth);
  EXPECT_NEAR(spectral_norm(w.transpose(), 200, 1e-12), truth, 1e-8 * truth);
  EXPECT_EQ(spectral_norm(Matrix::Zero(3, 3)), 0.0);
}

TEST(Train, FitsConstantSignal) {
  NetworkConfig cfg = small_net(1, 1, 1.0);
  cfg.hidden_widths = {16};
  auto net = init_network(cfg);
  TrainData data;
  data.points = random_matrix(1, 32, 1);
  data.targets = Matrix::Constant(1, 32, 0.3);
  TrainConfig tc;
  tc.steps = 2000;
  tc.learning_rate = 1e-2;
  const auto report = train(net, tc, data);
  EXPECT_EQ(report.status, "ok");
  EXPECT_EQ(report.steps_completed, 2000u);
  EXPECT_LT(report.final_metrics.mse, 1e-6);
  EXPECT_EQ(report.loss_history.front().step, 0u);
  EXPECT_EQ(report.loss_history.back().step, 2000u);
  EXPECT_EQ(report.first_layer_spectral_norm_history.size(), report.loss_history.size());
}

TEST(Train, IsDeterministic) {
  TrainData data;
  data.points = random_matrix(2, 40, 2);
  data.targets = random_matrix(1, 40, 3);
  TrainConfig tc;
  tc.steps = 50;
  tc.batch_size = 16;
  tc.record_every = 10;
  auto a = init_network(small_net(2, 1));
  auto b = init_network(small_net(2, 1));
  const auto ra = train(a, tc, data);
  const auto rb = train(b, tc, data);
  EXPECT_EQ(to_json(ra).dump(), to_json(rb).dump());
  EXPECT_EQ(a.layer(0).weight, b.layer(0).weight);
}

TEST(Train, ReportsDivergence) {
  TrainData data;
  data.points = random_matrix(1, 8, 2);
  data.targets = Matrix::Constant(1, 8, std::numeric_limits<double>::infinity());
  TrainConfig tc;
  tc.steps = 10;
  auto net = init_network(small_net(1, 1));
  EXPECT_EQ(train(net, tc, data).status, "diverged");
}

TEST(Train, IdentifiesLambdaDirection) {
  // Burgers data from u = 0 should leave lambda untouched (zero gradient).
  TrainData data;
  data.points = random_matrix(2, 16, 2);
  data.targets = Matrix::Zero(1, 16);
  TrainConfig tc;
  tc.task = Task::kBurgersIdent;
  tc.steps = 5;
  auto net = init_network(small_net(2, 1));
  const auto r = train(net, tc, data);
  ASSERT_TRUE(r.identified_params.has_value());
  EXPECT_TRUE(std::isfinite(r.identified_params->first));
}

TEST(Train, LearningRateDecays) {
  // With factor 1e-300 over two steps the second rate is 1e-150 times the
  // first, so the run ends where a single undecayed step does.
  TrainData data;
  data.points = random_matrix(2, 20, 4);
  data.targets = random_matrix(1, 20, 5);
  TrainConfig one;
  one.steps = 1;
  one.learning_rate = 1e-2;
  TrainConfig two = one;
  two.steps = 2;
  two.final_lr_factor = 1e-300;
  auto a = init_network(small_net(2, 1));
  auto b = init_network(small_net(2, 1));
  train(a, one, data);
  train(b, two, data);
  EXPECT_EQ(a.layer(0).weight, b.layer(0).weight);
  EXPECT_EQ(a.layer(1).bias, b.layer(1).bias);

  auto c = init_network(small_net(2, 1));
  two.final_lr_factor = 1.0;
  train(c, two, data);
  EXPECT_NE(a.layer(0).weight, c.layer(0).weight);
}

TEST(Train, LbfgsRefinesAfterAdam) {
  NetworkConfig cfg = small_net(1, 1, 1.0);
  cfg.hidden_widths = {8};
  TrainData data;
  data.points = random_matrix(1, 16, 6);
  data.targets = (2.0 * data.points).array().sin().matrix();
  TrainConfig tc;
  tc.steps = 10;
  tc.record_every = 25;
  auto adam_only = init_network(cfg);
  const auto before = train(adam_only, tc, data);
  tc.lbfgs_steps = 300;
  auto net = init_network(cfg);
  const auto r = train(net, tc, data);
  EXPECT_EQ(r.status, "ok");
  EXPECT_EQ(r.steps_completed, 10u);
  EXPECT_GT(r.lbfgs_iterations, 0u);
  EXPECT_LE(r.lbfgs_iterations, 300u);
  EXPECT_LT(r.final_metrics.mse, 1e-8);
  EXPECT_LT(r.final_metrics.mse, 1e-4 * before.final_metrics.mse);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
    EXPECT_GT(r.loss_history[i].step, r.loss_history[i - 1].step);
  }
  EXPECT_EQ(r.loss_history.back().step, 10u + r.lbfgs_iterations);
}

TEST(Train, LbfgsMovesBurgersLambdas) {
  // Smooth non-Burgers data gives nonzero lambda gradients.
  TrainData data;
  data.points = random_matrix(2, 32, 7);
  data.targets = data.points.row(1).array().sin().matrix();
  TrainConfig tc;
  tc.task = Task::kBurgersIdent;
  tc.steps = 1;
  tc.lbfgs_steps = 50;
  auto net = init_network(small_net(2, 1));
  const auto r = train(net, tc, data);
  ASSERT_TRUE(r.identified_params.has_value());
  EXPECT_GT(r.lbfgs_iterations, 0u);
  EXPECT_LT(r.loss_history.back().train_loss, r.loss_history.front().train_loss);
  EXPECT_EQ(r.identified_params_history.size(), r.loss_history.size());
  EXPECT_EQ(std::get<1>(r.identified_params_history.back()), r.identified_params->first);
}

TEST(TrainConfig, Validation) {
  TrainConfig tc;
  tc.steps = 0;
  EXPECT_THROW(tc.validate(), UsageError);
  tc.steps = 1;
  tc.learning_rate = -1.0;
  EXPECT_THROW(tc.validate(), UsageError);
  tc.learning_rate = 1e-3;
  tc.final_lr_factor = 0.0;
  EXPECT_THROW(tc.validate(), UsageError);
  tc.final_lr_factor = 1.5;
  EXPECT_THROW(tc.validate(), UsageError);
  tc.final_lr_factor = 0.1;
  EXPECT_NO_THROW(tc.validate());
}
