#include "sinnet/empirical.hpp"

#include <cmath>
#include <string>

#include "sinnet/error.hpp"
#include "sinnet/jet.hpp"
#include "sinnet/parallel.hpp"
#include "sinnet/stats.hpp"

namespace sinnet {

void EstimatorConfig::validate() const {
  if (width == 0) throw UsageError("estimator width must be positive");
  if (n_draws == 0) throw UsageError("estimator needs at least one draw");
}

Estimate summarize_draws(std::span<const double> draws) {
  if (draws.empty()) throw UsageError("no draws to summarize");
  const double n = static_cast<double>(draws.size());
  const double mean = pairwise_sum(draws) / n;
  std::vector<double> sq(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) sq[i] = (draws[i] - mean) * (draws[i] - mean);
  const double var = draws.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

namespace {

NetworkConfig draw_config(const NetworkConfig& config, const EstimatorConfig& est, std::size_t draw) {
  NetworkConfig c = config;
  c.hidden_widths.assign(config.hidden_widths.size(), est.width);
  c.seed = est.base_seed + draw;
  return c;
}

void check(const NetworkConfig& config, const EstimatorConfig& est, std::span<const double> center,
           const Matrix& points) {
  config.validate();
  est.validate();
  if (config.parametrization != Parametrization::kNtk) {
    throw UsageError("empirical kernels require the NTK parametrization");
  }
  if (config.output_dim != 1) throw UsageError("empirical kernels require a scalar output");
  if (center.size() != config.input_dim || points.rows() != static_cast<Eigen::Index>(config.input_dim)) {
    throw UsageError("empirical kernel input dimension mismatch");
  }
}

// Inputs with the center as column 0 followed by the points.
Matrix stack(std::span<const double> center, const Matrix& points) {
  Matrix all(points.rows(), points.cols() + 1);
  all.col(0) = Eigen::Map<const Vector>(center.data(), static_cast<Eigen::Index>(center.size()));
  all.rightCols(points.cols()) = points;
  return all;
}

template <typename PerDraw>
std::vector<Estimate> run_draws(const NetworkConfig& config, const EstimatorConfig& est,
                                std::span<const double> center, const Matrix& points, PerDraw per_draw) {
  check(config, est, center, points);
  const Matrix inputs = stack(center, points);
  const auto p = static_cast<std::size_t>(points.cols());
  std::vector<std::vector<double>> by_draw(est.n_draws);
  parallel_for(est.n_draws, [&](std::size_t d) {
    const SinusoidalNetwork net = init_network(draw_config(config, est, d));
    by_draw[d] = per_draw(net, inputs);
  });
  std::vector<Estimate> out;
  out.reserve(p);
  std::vector<double> column(est.n_draws);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t d = 0; d < est.n_draws; ++d) column[d] = by_draw[d][i];
    out.push_back(summarize_draws(column));
  }
  return out;
}

std::vector<double> ntk_row(const SinusoidalNetwork& net, const Matrix& inputs) {
  const Matrix gram = ntk_gram(net, inputs, 0);
  std::vector<double> row(static_cast<std::size_t>(inputs.cols() - 1));
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = gram(0, static_cast<Eigen::Index>(i + 1));
  return row;
}

std::vector<double> nngp_row(const SinusoidalNetwork& net, const Matrix& inputs) {
  const auto& config = net.config();
  const std::size_t last = net.layer_count() - 1;
  JetTape tape(net, inputs, {});
  const Matrix& h = tape.layer_input(last).value;
  const double n = static_cast<double>(h.rows());
  const double wv = weight_distribution(config, last).variance();
  const double bv = bias_distribution(config, last).variance();
  std::vector<double> row(static_cast<std::size_t>(inputs.cols() - 1));
  for (std::size_t i = 0; i < row.size(); ++i) {
    row[i] = wv * h.col(0).dot(h.col(static_cast<Eigen::Index>(i + 1))) / n + bv;
  }
  return row;
}

Matrix single(std::span<const double> y) {
  return Eigen::Map<const Matrix>(y.data(), static_cast<Eigen::Index>(y.size()), 1);
}

}  // namespace

std::vector<Estimate> empirical_ntk_slice(const NetworkConfig& config, const EstimatorConfig& est,
                                          std::span<const double> center, const Matrix& points) {
  return run_draws(config, est, center, points, ntk_row);
}

std::vector<Estimate> empirical_nngp_slice(const NetworkConfig& config, const EstimatorConfig& est,
                                           std::span<const double> center, const Matrix& points) {
  return run_draws(config, est, center, points, nngp_row);
}

Estimate empirical_ntk(const NetworkConfig& config, const EstimatorConfig& est,
                       std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("empirical kernel input dimension mismatch");
  return empirical_ntk_slice(config, est, x, single(y)).front();
}

Estimate empirical_nngp(const NetworkConfig& config, const EstimatorConfig& est,
                        std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("empirical kernel input dimension mismatch");
  return empirical_nngp_slice(config, est, x, single(y)).front();
}

}  // namespace sinnet
