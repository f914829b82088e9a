#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "sinnet/error.hpp"
#include "sinnet/random.hpp"
#include "sinnet/stats.hpp"
#include "sinnet/trainer.hpp"

namespace sinnet {

void TrainConfig::validate() const {
  if (steps == 0) throw UsageError("steps must be at least 1");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (first_layer_lr && !(*first_layer_lr > 0.0)) throw UsageError("first-layer learning rate must be positive");
  if (!(final_lr_factor > 0.0 && final_lr_factor <= 1.0)) throw UsageError("final lr factor must be in (0, 1]");
  if (batch_size && *batch_size == 0) throw UsageError("batch size must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw UsageError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw UsageError("Adam epsilon must be positive");
  if (record_every == 0) throw UsageError("record interval must be positive");
}

double spectral_norm(const Matrix& w, int max_iterations, double tolerance) {
  if (w.size() == 0) return 0.0;
  const Matrix gram = w.rows() < w.cols() ? Matrix(w * w.transpose()) : Matrix(w.transpose() * w);
  Vector v = Vector::Ones(gram.rows()) / std::sqrt(static_cast<double>(gram.rows()));
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double estimate = next.dot(gram * next);
    const bool done = std::abs(estimate - lambda) <= tolerance * std::max(1.0, std::abs(estimate));
    lambda = estimate;
    v = std::move(next);
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

namespace {

class Adam {
 public:
  Adam(const SinusoidalNetwork& net, const TrainConfig& cfg, std::size_t extra)
      : cfg_(cfg), m_(ParamGradient::zeros_like(net)), v_(ParamGradient::zeros_like(net)),
        mx_(extra, 0.0), vx_(extra, 0.0) {}

  void step(SinusoidalNetwork& net, const ParamGradient& g, std::vector<double>& extra,
            const std::vector<double>& extra_grad) {
    ++t_;
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double decay =
        std::pow(cfg_.final_lr_factor, static_cast<double>(t_ - 1) / static_cast<double>(cfg_.steps));
    auto& layers = net.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const double lr = decay * ((l == 0 && cfg_.first_layer_lr) ? *cfg_.first_layer_lr : cfg_.learning_rate);
      update(layers[l].weight, m_.layers[l].weight, v_.layers[l].weight, g.layers[l].weight, lr, c1, c2);
      update(layers[l].bias, m_.layers[l].bias, v_.layers[l].bias, g.layers[l].bias, lr, c1, c2);
    }
    for (std::size_t k = 0; k < extra.size(); ++k) {
      mx_[k] = b1 * mx_[k] + (1.0 - b1) * extra_grad[k];
      vx_[k] = b2 * vx_[k] + (1.0 - b2) * extra_grad[k] * extra_grad[k];
      extra[k] -= decay * cfg_.learning_rate * (mx_[k] / c1) / (std::sqrt(vx_[k] / c2) + cfg_.adam_eps);
    }
  }

 private:
  template <typename P>
  void update(P& p, P& m, P& v, const P& g, double lr, double c1, double c2) const {
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.adam_eps);
  }

  const TrainConfig& cfg_;
  ParamGradient m_;
  ParamGradient v_;
  std::vector<double> mx_;
  std::vector<double> vx_;
  std::size_t t_ = 0;
};

// Network parameters followed by the extra scalars, as one flat vector.
std::vector<double> flatten(const SinusoidalNetwork& net, const std::vector<double>& extra) {
  std::vector<double> out;
  out.reserve(net.parameter_count() + extra.size());
  for (const auto& l : net.layers()) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

void unflatten(const double* p, SinusoidalNetwork& net, std::vector<double>& extra) {
  for (auto& l : net.mutable_layers()) {
    std::copy(p, p + l.weight.size(), l.weight.data());
    p += l.weight.size();
    std::copy(p, p + l.bias.size(), l.bias.data());
    p += l.bias.size();
  }
  std::copy(p, p + extra.size(), extra.begin());
}

void flatten_gradient(const LossResult& r, double* g) {
  for (const auto& l : r.grads.layers) {
    g = std::copy(l.weight.data(), l.weight.data() + l.weight.size(), g);
    g = std::copy(l.bias.data(), l.bias.data() + l.bias.size(), g);
  }
  std::copy(r.lambda_grads.begin(), r.lambda_grads.end(), g);
}

class FullBatchLoss final : public ceres::FirstOrderFunction {
 public:
  FullBatchLoss(Task task, const SinusoidalNetwork& net, const TrainData& data, std::size_t extra)
      : task_(task), net_(net), extra_(extra), data_(data) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    unflatten(parameters, net_, extra_);
    const auto r = compute_loss(task_, net_, data_.points, data_.targets, extra_, gradient != nullptr);
    if (!std::isfinite(r.loss)) return false;
    *cost = r.loss;
    if (gradient) flatten_gradient(r, gradient);
    return true;
  }

  int NumParameters() const override { return static_cast<int>(net_.parameter_count() + extra_.size()); }

 private:
  Task task_;
  mutable SinusoidalNetwork net_;
  mutable std::vector<double> extra_;
  const TrainData& data_;
};

class RecordCallback final : public ceres::IterationCallback {
 public:
  RecordCallback(std::size_t every, std::function<void(std::size_t, double)> record)
      : every_(every), record_(std::move(record)) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& s) override {
    const auto it = static_cast<std::size_t>(s.iteration);
    if (it > 0 && it % every_ == 0) record_(it, s.cost);
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::size_t every_;
  std::function<void(std::size_t, double)> record_;
};

Matrix gather(const Matrix& m, std::span<const std::size_t> cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(cols[i]));
  return out;
}

// Value MSE with the mean offset removed (for derivative-supervised fits).
double offset_free_mse(const Matrix& pred, const Matrix& target) {
  Matrix r = pred - target;
  r.array() -= r.mean();
  return r.squaredNorm() / static_cast<double>(r.size());
}

constexpr Eigen::Index kEvalChunk = 2048;

}  // namespace

double loss_value(Task task, const SinusoidalNetwork& net, const Matrix& points, const Matrix& targets,
                  std::span<const double> lambdas) {
  const Eigen::Index n = points.cols();
  if (n <= kEvalChunk) return compute_loss(task, net, points, targets, lambdas, false).loss;
  // Every task's loss is a mean over columns, so chunk means combine by weight.
  std::vector<double> parts;
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, n - start);
    const double l = compute_loss(task, net, points.middleCols(start, len), targets.middleCols(start, len), lambdas,
                                  false).loss;
    parts.push_back(l * static_cast<double>(len));
  }
  return pairwise_sum(parts) / static_cast<double>(n);
}

TrainReport train(SinusoidalNetwork& net, const TrainConfig& config, const TrainData& data) {
  config.validate();
  const Eigen::Index n = data.points.cols();
  if (n == 0) throw DataError("training set is empty");
  if (data.targets.cols() != n) throw UsageError("training points and targets differ in length");

  const bool burgers = config.task == Task::kBurgersIdent;
  std::vector<double> lambdas = burgers ? std::vector<double>{0.0, 0.0} : std::vector<double>{};
  Adam adam(net, config, lambdas.size());

  const auto total = static_cast<std::size_t>(n);
  const std::size_t batch = config.batch_size ? std::min(*config.batch_size, total) : total;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);
  std::size_t cursor = total;  // forces a shuffle before the first minibatch

  TrainReport report;
  auto record = [&](std::size_t step, double full_loss) {
    HistoryEntry e{step, full_loss, std::nullopt};
    if (data.test) e.test_loss = loss_value(config.task, net, data.test->first, data.test->second, lambdas);
    report.loss_history.push_back(e);
    report.first_layer_spectral_norm_history.emplace_back(step, spectral_norm(net.layer(0).weight));
    if (burgers) report.identified_params_history.emplace_back(step, lambdas[0], lambdas[1]);
  };

  for (std::size_t step = 0; step < config.steps; ++step) {
    LossResult lr;
    if (batch == total) {
      lr = compute_loss(config.task, net, data.points, data.targets, lambdas);
    } else {
      if (cursor + batch > total) {
        // Fisher–Yates reshuffle at each epoch boundary.
        for (std::size_t i = total - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        cursor = 0;
      }
      const std::span<const std::size_t> cols(order.data() + cursor, batch);
      cursor += batch;
      lr = compute_loss(config.task, net, gather(data.points, cols), gather(data.targets, cols), lambdas);
    }
    if (step % config.record_every == 0) {
      const double full = batch == total ? lr.loss : loss_value(config.task, net, data.points, data.targets, lambdas);
      if (!std::isfinite(full)) {
        report.status = "diverged";
        break;
      }
      record(step, full);
    }
    if (!std::isfinite(lr.loss)) {
      report.status = "diverged";
      break;
    }
    adam.step(net, lr.grads, lambdas, lr.lambda_grads);
    report.steps_completed = step + 1;
  }

  if (report.status == "ok" && config.lbfgs_steps > 0) {
    std::vector<double> x = flatten(net, lambdas);
    const std::size_t offset = report.steps_completed;
    // The callback sees the accepted iterate, so parameters are synced first.
    RecordCallback callback(config.record_every, [&](std::size_t it, double cost) {
      unflatten(x.data(), net, lambdas);
      record(offset + it, cost);
    });
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_lbfgs_rank = 50;
    options.max_num_iterations = static_cast<int>(config.lbfgs_steps);
    options.function_tolerance = 1e-15;
    options.gradient_tolerance = 1e-15;
    options.parameter_tolerance = 1e-15;
    options.logging_type = ceres::SILENT;
    options.update_state_every_iteration = true;
    options.callbacks.push_back(&callback);
    ceres::GradientProblem problem(new FullBatchLoss(config.task, net, data, lambdas.size()));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, x.data(), &summary);
    unflatten(x.data(), net, lambdas);
    report.lbfgs_iterations = summary.iterations.empty() ? 0 : static_cast<std::size_t>(summary.iterations.back().iteration);
  }

  if (report.status == "ok") {
    const double final_loss = loss_value(config.task, net, data.points, data.targets, lambdas);
    if (!std::isfinite(final_loss)) {
      report.status = "diverged";
    } else {
      const std::size_t last = report.steps_completed + report.lbfgs_iterations;
      if (report.loss_history.empty() || report.loss_history.back().step != last) record(last, final_loss);
    }
  }

  if (data.eval) {
    const Matrix pred = net.forward_batch(data.eval->first);
    if (config.task == Task::kPoissonGrad || config.task == Task::kPoissonLap) {
      report.final_metrics = metrics_from_mse(offset_free_mse(pred, data.eval->second));
    } else {
      report.final_metrics = evaluate(net, data.eval->first, data.eval->second);
    }
  } else if (config.task == Task::kFit || burgers) {
    report.final_metrics = evaluate(net, data.points, data.targets);
  } else {
    report.final_metrics = metrics_from_mse(report.loss_history.empty() ? 0.0 : report.loss_history.back().train_loss);
  }
  if (burgers) report.identified_params = std::make_pair(lambdas[0], lambdas[1]);
  return report;
}

}  // namespace sinnet
