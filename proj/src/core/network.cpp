#include "sinnet/network.hpp"

#include <algorithm>
#include <cmath>

#include "sinnet/error.hpp"
#include "sinnet/random.hpp"
#include "sinnet/stats.hpp"

namespace sinnet {

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::kSsnNormal ? "ssn" : "siren";
}

std::string to_string(Parametrization parametrization) {
  return parametrization == Parametrization::kPractical ? "practical" : "ntk";
}

void NetworkConfig::validate() const {
  if (input_dim == 0) throw UsageError("network input_dim must be positive");
  if (output_dim == 0) throw UsageError("network output_dim must be positive");
  if (hidden_widths.empty()) throw UsageError("network needs at least one hidden layer");
  for (std::size_t w : hidden_widths) {
    if (w == 0) throw UsageError("hidden layer widths must be positive");
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) throw UsageError("omega must be positive");
  if (init == InitScheme::kSirenUniform && (!(siren_c > 0.0) || !std::isfinite(siren_c))) {
    throw UsageError("SIREN uniform bound c must be positive");
  }
  if (!per_axis_scale.empty()) {
    if (per_axis_scale.size() != input_dim) {
      throw UsageError("per_axis_scale length must equal input_dim");
    }
    for (double s : per_axis_scale) {
      if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("per_axis_scale entries must be positive");
    }
  }
}

std::size_t NetworkConfig::fan_in(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

std::size_t NetworkConfig::fan_out(std::size_t layer) const {
  return layer < hidden_widths.size() ? hidden_widths[layer] : output_dim;
}

std::vector<double> NetworkConfig::axis_omega() const {
  std::vector<double> out(input_dim, omega);
  if (!per_axis_scale.empty()) {
    for (std::size_t j = 0; j < input_dim; ++j) out[j] *= per_axis_scale[j];
  }
  return out;
}

WeightDistribution weight_distribution(const NetworkConfig& config, std::size_t layer) {
  const double n = static_cast<double>(config.fan_in(layer));
  using Kind = WeightDistribution::Kind;
  if (config.parametrization == Parametrization::kNtk) {
    return config.init == InitScheme::kSsnNormal ? WeightDistribution{Kind::kNormal, 1.0}
                                                 : WeightDistribution{Kind::kUniform, config.siren_c};
  }
  if (config.init == InitScheme::kSsnNormal) {
    // Kaiming normal: variance 2 / fan_in.
    return {Kind::kNormal, std::sqrt(2.0 / n)};
  }
  if (layer == 0) return {Kind::kUniform, 1.0 / n};
  return {Kind::kUniform, config.siren_c / std::sqrt(n) / config.omega};
}

WeightDistribution bias_distribution(const NetworkConfig& config, std::size_t layer) {
  const double n = static_cast<double>(config.fan_in(layer));
  using Kind = WeightDistribution::Kind;
  if (config.parametrization == Parametrization::kNtk) return {Kind::kNormal, 1.0};
  if (config.init == InitScheme::kSsnNormal) return {Kind::kNormal, std::sqrt(2.0 / n)};
  return {Kind::kUniform, 1.0 / std::sqrt(n)};
}

namespace {

double draw(Rng& rng, const WeightDistribution& dist) {
  if (dist.kind == WeightDistribution::Kind::kNormal) return dist.scale * rng.normal();
  return rng.uniform(-dist.scale, dist.scale);
}

std::vector<LayerScaling> make_scaling(const NetworkConfig& config) {
  const std::size_t count = config.layer_count();
  std::vector<LayerScaling> out(count);
  out[0] = {1.0, config.omega};
  for (std::size_t l = 1; l < count; ++l) {
    if (config.parametrization == Parametrization::kNtk) {
      out[l] = {1.0 / std::sqrt(static_cast<double>(config.fan_in(l))), 1.0};
    } else if (config.init == InitScheme::kSirenUniform && l + 1 < count) {
      out[l] = {config.omega, config.omega};
    } else {
      out[l] = {1.0, 1.0};
    }
  }
  return out;
}

}  // namespace

SinusoidalNetwork::SinusoidalNetwork(NetworkConfig config, std::vector<LayerParams> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() != config_.layer_count()) {
    throw UsageError("parameter list length does not match network depth");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(config_.fan_out(l));
    const auto cols = static_cast<Eigen::Index>(config_.fan_in(l));
    if (layers_[l].weight.rows() != rows || layers_[l].weight.cols() != cols ||
        layers_[l].bias.size() != rows) {
      throw UsageError("layer " + std::to_string(l) + " parameter shape mismatch");
    }
  }
  scaling_ = make_scaling(config_);
  const auto omega = config_.axis_omega();
  input_scale_ = Eigen::Map<const Vector>(omega.data(), static_cast<Eigen::Index>(omega.size()));
}

std::size_t SinusoidalNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : layers_) n += static_cast<std::size_t>(p.weight.size() + p.bias.size());
  return n;
}

Matrix SinusoidalNetwork::forward_batch(const Matrix& inputs) const {
  if (inputs.rows() != static_cast<Eigen::Index>(config_.input_dim)) {
    throw UsageError("input dimension mismatch: expected " + std::to_string(config_.input_dim) +
                     ", got " + std::to_string(inputs.rows()));
  }
  Matrix a = input_scale_.asDiagonal() * inputs;
  const std::size_t last = layers_.size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    const auto& p = layers_[l];
    const auto& s = scaling_[l];
    Matrix z = s.weight_scale * (p.weight * a);
    z.colwise() += s.bias_scale * p.bias;
    if (l == last) return z;
    a = z.array().sin().matrix();
  }
  return a;  // unreachable
}

Vector SinusoidalNetwork::forward(std::span<const double> x) const {
  const Matrix in = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
  return forward_batch(in).col(0);
}

SinusoidalNetwork init_network(const NetworkConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::vector<LayerParams> layers(config.layer_count());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(config.fan_out(l));
    const auto cols = static_cast<Eigen::Index>(config.fan_in(l));
    const auto wd = weight_distribution(config, l);
    const auto bd = bias_distribution(config, l);
    layers[l].weight.resize(rows, cols);
    // Row-major draw order so the sequence does not depend on storage order.
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) layers[l].weight(i, j) = draw(rng, wd);
    }
    layers[l].bias.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) layers[l].bias(i) = draw(rng, bd);
  }
  return SinusoidalNetwork(config, std::move(layers));
}

namespace {

// Pre-sine activations of every hidden layer.
std::vector<Matrix> hidden_pre(const SinusoidalNetwork& net, const Matrix& inputs) {
  const auto& config = net.config();
  if (inputs.rows() != static_cast<Eigen::Index>(config.input_dim)) {
    throw UsageError("input dimension mismatch");
  }
  if (inputs.cols() == 0) throw UsageError("activation statistics need a non-empty batch");
  std::vector<Matrix> out;
  Matrix a = net.input_scale().asDiagonal() * inputs;
  for (std::size_t l = 0; l + 1 < net.layer_count(); ++l) {
    const auto& p = net.layer(l);
    const auto& s = net.scaling(l);
    Matrix z = s.weight_scale * (p.weight * a);
    z.colwise() += s.bias_scale * p.bias;
    a = z.array().sin().matrix();
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<std::size_t> histogram(const Matrix& m, double lo, double hi) {
  std::vector<std::size_t> bins(kHistogramBins, 0);
  const double width = (hi - lo) / static_cast<double>(kHistogramBins);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (v < lo || v > hi) continue;
    auto k = static_cast<std::size_t>((v - lo) / width);
    bins[std::min(k, kHistogramBins - 1)] += 1;
  }
  return bins;
}

}  // namespace

std::vector<LayerActivationStats> activation_stats(const SinusoidalNetwork& net,
                                                   const Matrix& inputs) {
  std::vector<LayerActivationStats> out;
  for (const Matrix& z : hidden_pre(net, inputs)) {
    const Matrix s = z.array().sin().matrix();
    const auto pre = summarize({z.data(), static_cast<std::size_t>(z.size())});
    const auto post = summarize({s.data(), static_cast<std::size_t>(s.size())});
    LayerActivationStats st;
    st.pre_mean = pre.mean;
    st.pre_var = pre.variance;
    st.post_mean = post.mean;
    st.post_var = post.variance;
    st.pre_histogram = histogram(z, -kPreHistogramRange, kPreHistogramRange);
    st.post_histogram = histogram(s, -1.0, 1.0);
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<double> hidden_preactivations(const SinusoidalNetwork& net, const Matrix& inputs,
                                          std::size_t layer) {
  auto all = hidden_pre(net, inputs);
  if (layer >= all.size()) throw UsageError("hidden layer index out of range");
  const Matrix& z = all[layer];
  return {z.data(), z.data() + z.size()};
}

}  // namespace sinnet
