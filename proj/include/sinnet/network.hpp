#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sinnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class InitScheme { kSsnNormal, kSirenUniform };
enum class Parametrization { kPractical, kNtk };

std::string to_string(InitScheme scheme);
std::string to_string(Parametrization parametrization);

/// Architecture and initialization of a sine-activated MLP.
///
/// The first hidden layer sees the input scaled per axis by
/// Omega_j = per_axis_scale_j * omega. `hidden_widths.size()` is the number
/// of sine layers; the output layer is affine.
struct NetworkConfig {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths{256};
  std::size_t output_dim = 1;
  double omega = 1.0;
  /// Empty means all ones.
  std::vector<double> per_axis_scale;
  InitScheme init = InitScheme::kSsnNormal;
  /// Uniform bound for kSirenUniform; ignored for kSsnNormal.
  double siren_c = 2.449489742783178;  // sqrt(6)
  Parametrization parametrization = Parametrization::kPractical;
  std::uint64_t seed = 0;

  /// Throws UsageError on zero dimensions, omega <= 0, c <= 0, or a
  /// per_axis_scale of the wrong length.
  void validate() const;

  std::size_t depth() const { return hidden_widths.size(); }
  std::size_t layer_count() const { return hidden_widths.size() + 1; }
  std::size_t fan_in(std::size_t layer) const;
  std::size_t fan_out(std::size_t layer) const;

  /// Omega vector (per_axis_scale * omega), length input_dim.
  std::vector<double> axis_omega() const;
};

struct LayerParams {
  Matrix weight;  // fan_out x fan_in
  Vector bias;    // fan_out
};

/// Scalars applied inside one affine layer:
///   z = weight_scale * W * (input_scale ⊙ a) + bias_scale * b
/// input_scale is the Omega vector on layer 0 and absent elsewhere.
struct LayerScaling {
  double weight_scale = 1.0;
  double bias_scale = 1.0;
};

/// Sine network with immutable architecture.
///
/// PRACTICAL/SSN:   h1 = sin(W1 (Omega ⊙ x) + omega b1), hl = sin(Wl h + bl)
/// PRACTICAL/SIREN: same first layer, hl = sin(omega (Wl h + bl))
/// NTK:             f0 = W0 (Omega ⊙ x) + omega b0,
///                  fl = Wl sin(f_{l-1}) / sqrt(n_l) + bl
/// All three end in an affine output layer.
class SinusoidalNetwork {
 public:
  /// Takes ownership of explicit parameters; throws UsageError when shapes
  /// disagree with the config.
  SinusoidalNetwork(NetworkConfig config, std::vector<LayerParams> layers);

  const NetworkConfig& config() const { return config_; }
  std::size_t layer_count() const { return layers_.size(); }
  const LayerParams& layer(std::size_t l) const { return layers_[l]; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  const LayerScaling& scaling(std::size_t l) const { return scaling_[l]; }
  const Vector& input_scale() const { return input_scale_; }
  std::size_t parameter_count() const;

  /// Output for a single input of length input_dim.
  Vector forward(std::span<const double> x) const;
  /// Outputs for a batch stored column-wise (input_dim x B -> output_dim x B).
  Matrix forward_batch(const Matrix& inputs) const;

  /// Parameter storage for optimizers. Shapes must not be changed.
  std::vector<LayerParams>& mutable_layers() { return layers_; }

 private:
  NetworkConfig config_;
  std::vector<LayerParams> layers_;
  std::vector<LayerScaling> scaling_;
  Vector input_scale_;
};

SinusoidalNetwork init_network(const NetworkConfig& config);

/// Distribution a layer's weights are drawn from under `config`.
struct WeightDistribution {
  enum class Kind { kNormal, kUniform } kind;
  double scale;  // stddev for kNormal, half-width for kUniform

  double variance() const { return kind == Kind::kNormal ? scale * scale : scale * scale / 3.0; }
};

WeightDistribution weight_distribution(const NetworkConfig& config, std::size_t layer);
WeightDistribution bias_distribution(const NetworkConfig& config, std::size_t layer);

struct LayerActivationStats {
  double pre_mean = 0.0;
  double pre_var = 0.0;
  double post_mean = 0.0;
  double post_var = 0.0;
  std::vector<std::size_t> pre_histogram;   // kPreRange, uniform bins
  std::vector<std::size_t> post_histogram;  // [-1, 1], uniform bins
};

inline constexpr double kPreHistogramRange = 4.0;
inline constexpr std::size_t kHistogramBins = 64;

/// Moments and histograms of pre-sine and post-sine activations per hidden
/// layer over a batch (input_dim x B, B > 0).
std::vector<LayerActivationStats> activation_stats(const SinusoidalNetwork& net,
                                                   const Matrix& inputs);

/// Raw pre-sine activations of one hidden layer, flattened (for
/// distribution tests).
std::vector<double> hidden_preactivations(const SinusoidalNetwork& net, const Matrix& inputs,
                                          std::size_t layer);

}  // namespace sinnet
