#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sinnet/network.hpp"

namespace sinnet {

/// Second-order Taylor jet of a scalar along a declared set of input axes.
///
/// `d1[a]` is the partial along the a-th declared axis; `d2` holds one entry
/// per declared pair. Arithmetic propagates exactly through +, -, *, affine
/// maps, sin and cos.
struct Jet2 {
  struct Pair {
    std::size_t first = 0;  // positions in the declared axis list, first <= second
    std::size_t second = 0;
    bool operator==(const Pair&) const = default;
  };

  double value = 0.0;
  std::vector<double> d1;
  std::vector<double> d2;
  std::vector<Pair> pairs;

  static Jet2 constant(double v, std::size_t axes, std::vector<Pair> pairs);
  /// The jet of input coordinate `axis` (position in the declared list).
  static Jet2 variable(double v, std::size_t axis, std::size_t axes, std::vector<Pair> pairs);

  /// Second partial for declared positions (a, b); throws UsageError when the
  /// pair was not declared.
  double second(std::size_t a, std::size_t b) const;

  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(double s);
  Jet2& operator+=(double s) {
    value += s;
    return *this;
  }
};

Jet2 operator+(Jet2 a, const Jet2& b);
Jet2 operator-(Jet2 a, const Jet2& b);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, Jet2 a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);

/// All pairs (a <= b) over `axes` positions.
std::vector<Jet2::Pair> all_pairs(std::size_t axes);
/// Diagonal pairs (a, a) only, enough for Laplacians.
std::vector<Jet2::Pair> diagonal_pairs(std::size_t axes);

/// Which input partials to propagate through a network.
struct JetRequest {
  std::vector<std::size_t> axes;  // input axis indices
  std::vector<Jet2::Pair> pairs;  // positions into `axes`

  void validate(std::size_t input_dim) const;
};

/// Jets for a batch: every member is (units x batch).
struct BatchJet {
  Matrix value;
  std::vector<Matrix> d1;
  std::vector<Matrix> d2;

  static BatchJet zeros(Eigen::Index rows, Eigen::Index cols, std::size_t axes, std::size_t pairs);
};

/// Parameter-shaped gradient (mirrors SinusoidalNetwork layers).
struct ParamGradient {
  std::vector<LayerParams> layers;

  static ParamGradient zeros_like(const SinusoidalNetwork& net);
  double dot(const ParamGradient& other) const;
  ParamGradient& operator+=(const ParamGradient& other);
};

/// Forward pass that records every layer's jets so adjoints can be pulled
/// back to the parameters.
///
/// Holds a reference to `net`; the network must outlive the tape.
class JetTape {
 public:
  JetTape(const SinusoidalNetwork& net, const Matrix& inputs, JetRequest request);

  const JetRequest& request() const { return request_; }
  const BatchJet& output() const { return output_; }
  Eigen::Index batch() const { return output_.value.cols(); }

  /// Input jet of affine layer l (scaled input for l = 0, sine output after).
  const BatchJet& layer_input(std::size_t l) const { return inputs_[l]; }

  /// Adjoints of each layer's pre-activation jet given the adjoint of the
  /// output jet. Columns never mix, so per-sample adjoints stay separate.
  std::vector<BatchJet> preactivation_adjoints(const BatchJet& output_adjoint) const;

  /// Gradient of sum over the batch of <output_adjoint, output jet> with
  /// respect to every parameter.
  ParamGradient backward(const BatchJet& output_adjoint) const;

 private:
  const SinusoidalNetwork& net_;
  JetRequest request_;
  std::vector<BatchJet> inputs_;  // per affine layer
  std::vector<BatchJet> pre_;     // per hidden layer
  std::vector<Matrix> sin_;
  std::vector<Matrix> cos_;
  BatchJet output_;
};

/// Exact gradient of output `output_index` with respect to all parameters.
ParamGradient param_gradient(const SinusoidalNetwork& net, std::span<const double> x,
                             std::size_t output_index);

/// Value plus first (and, for order 2, all second) partials of every output
/// along `axes`.
std::vector<Jet2> input_jet(const SinusoidalNetwork& net, std::span<const double> x,
                            const std::vector<std::size_t>& axes, int order);

/// Finite-width NTK Gram matrix <grad f_k(x_i), grad f_k(x_j)> over the
/// columns of `inputs`, assembled from per-layer factors without
/// materializing per-sample gradients.
Matrix ntk_gram(const SinusoidalNetwork& net, const Matrix& inputs, std::size_t output_index);

}  // namespace sinnet
