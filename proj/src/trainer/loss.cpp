#include <cmath>
#include <limits>
#include <string>

#include "sinnet/error.hpp"
#include "sinnet/stats.hpp"
#include "sinnet/trainer.hpp"

namespace sinnet {

std::string to_string(Task task) {
  switch (task) {
    case Task::kFit:
      return "FIT";
    case Task::kPoissonGrad:
      return "POISSON_GRAD";
    case Task::kPoissonLap:
      return "POISSON_LAP";
    case Task::kBurgersIdent:
      return "BURGERS_IDENT";
  }
  return "?";
}

TrainData burgers_train_data(const PdeDataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) throw DataError("Burgers dataset is empty");
  TrainData d;
  d.points.resize(2, n);
  d.targets.resize(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    d.points(0, i) = 2.0 * data.t[k] - 1.0;
    d.points(1, i) = data.x[k];
    d.targets(0, i) = data.u[k];
  }
  return d;
}

namespace {

// Mean of squared entries with pairwise summation, so the value does not
// depend on Eigen's reduction order.
double mean_square(const Matrix& r) {
  std::vector<double> sq(static_cast<std::size_t>(r.size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) sq[static_cast<std::size_t>(i)] = r.data()[i] * r.data()[i];
  return pairwise_sum(sq) / static_cast<double>(r.size());
}

JetRequest all_axes(std::size_t dim, bool diagonal_second) {
  JetRequest req;
  for (std::size_t a = 0; a < dim; ++a) req.axes.push_back(a);
  if (diagonal_second) req.pairs = diagonal_pairs(dim);
  return req;
}

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw UsageError(std::string(what) + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

LossResult compute_loss(Task task, const SinusoidalNetwork& net, const Matrix& points, const Matrix& targets,
                        std::span<const double> lambdas, bool with_gradients) {
  const auto& cfg = net.config();
  const Eigen::Index n = points.cols();
  if (n == 0) throw DataError("loss needs at least one sample");
  if (points.rows() != static_cast<Eigen::Index>(cfg.input_dim)) throw UsageError("points do not match input_dim");
  const auto d = static_cast<Eigen::Index>(cfg.input_dim);
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult out;

  switch (task) {
    case Task::kFit: {
      expect_shape(targets, static_cast<Eigen::Index>(cfg.output_dim), n, "FIT targets");
      JetTape tape(net, points, JetRequest{});
      const Matrix r = tape.output().value - targets;
      out.loss = mean_square(r);
      if (!with_gradients) return out;
      BatchJet adj = BatchJet::zeros(r.rows(), n, 0, 0);
      adj.value = (2.0 / static_cast<double>(r.size())) * r;
      out.grads = tape.backward(adj);
      return out;
    }
    case Task::kPoissonGrad: {
      if (cfg.output_dim != 1) throw UsageError("Poisson tasks need a scalar output");
      expect_shape(targets, d, n, "POISSON_GRAD targets");
      JetTape tape(net, points, all_axes(cfg.input_dim, false));
      BatchJet adj = BatchJet::zeros(1, n, cfg.input_dim, 0);
      Matrix r(d, n);
      for (Eigen::Index k = 0; k < d; ++k) r.row(k) = tape.output().d1[static_cast<std::size_t>(k)] - targets.row(k);
      out.loss = mean_square(r);
      if (!with_gradients) return out;
      const double s = 2.0 / static_cast<double>(r.size());
      for (Eigen::Index k = 0; k < d; ++k) adj.d1[static_cast<std::size_t>(k)] = s * r.row(k);
      out.grads = tape.backward(adj);
      return out;
    }
    case Task::kPoissonLap: {
      if (cfg.output_dim != 1) throw UsageError("Poisson tasks need a scalar output");
      expect_shape(targets, 1, n, "POISSON_LAP targets");
      JetTape tape(net, points, all_axes(cfg.input_dim, true));
      Matrix lap = Matrix::Zero(1, n);
      for (const auto& d2 : tape.output().d2) lap += d2;
      const Matrix r = lap - targets;
      out.loss = mean_square(r);
      if (!with_gradients) return out;
      BatchJet adj = BatchJet::zeros(1, n, cfg.input_dim, cfg.input_dim);
      for (auto& d2 : adj.d2) d2 = (2.0 * inv_n) * r;
      out.grads = tape.backward(adj);
      return out;
    }
    case Task::kBurgersIdent: {
      if (cfg.input_dim != 2 || cfg.output_dim != 1) {
        throw UsageError("BURGERS_IDENT needs a network with inputs (t, x) and a scalar output");
      }
      expect_shape(targets, 1, n, "BURGERS_IDENT targets");
      if (lambdas.size() != 2) throw UsageError("BURGERS_IDENT needs (lambda1, lambda2)");
      const double l1 = lambdas[0];
      const double l2 = lambdas[1];
      JetRequest req;
      req.axes = {0, 1};
      req.pairs = {Jet2::Pair{1, 1}};
      JetTape tape(net, points, req);
      const auto& o = tape.output();
      const Eigen::ArrayXXd u = o.value.array();
      const Eigen::ArrayXXd ut = kBurgersTimeScale * o.d1[0].array();
      const Eigen::ArrayXXd ux = o.d1[1].array();
      const Eigen::ArrayXXd uxx = o.d2[0].array();
      const Matrix data_r = o.value - targets;
      const Matrix res = (ut + l1 * u * ux - l2 * uxx).matrix();
      out.loss = mean_square(data_r) + mean_square(res);
      if (!with_gradients) return out;

      const Eigen::ArrayXXd g = (2.0 * inv_n) * res.array();
      BatchJet adj = BatchJet::zeros(1, n, 2, 1);
      adj.value = ((2.0 * inv_n) * data_r.array() + g * l1 * ux).matrix();
      adj.d1[0] = (g * kBurgersTimeScale).matrix();
      adj.d1[1] = (g * l1 * u).matrix();
      adj.d2[0] = (-g * l2).matrix();
      out.grads = tape.backward(adj);

      std::vector<double> g1(static_cast<std::size_t>(n));
      std::vector<double> g2(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        g1[static_cast<std::size_t>(i)] = g(0, i) * u(0, i) * ux(0, i);
        g2[static_cast<std::size_t>(i)] = -g(0, i) * uxx(0, i);
      }
      out.lambda_grads = {pairwise_sum(g1), pairwise_sum(g2)};
      return out;
    }
  }
  throw UsageError("unknown task");
}

Metrics metrics_from_mse(double mse) {
  Metrics m;
  m.mse = mse;
  m.psnr = mse > 0.0 ? -10.0 * std::log10(mse) : std::numeric_limits<double>::infinity();
  return m;
}

Metrics evaluate(const SinusoidalNetwork& net, const Matrix& points, const Matrix& targets) {
  if (points.cols() == 0) throw DataError("cannot evaluate on an empty set");
  if (targets.cols() != points.cols()) throw UsageError("points and targets differ in length");
  const Matrix pred = net.forward_batch(points);
  if (pred.rows() != targets.rows()) throw UsageError("targets do not match output_dim");
  return metrics_from_mse(mean_square(pred - targets));
}

}  // namespace sinnet
