#include "sinnet/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sinnet/error.hpp"

namespace sinnet {

// ---------------------------------------------------------------------------
// Scalar jets

Jet2 Jet2::constant(double v, std::size_t axes, std::vector<Pair> pairs) {
  Jet2 j;
  j.value = v;
  j.d1.assign(axes, 0.0);
  j.d2.assign(pairs.size(), 0.0);
  j.pairs = std::move(pairs);
  return j;
}

Jet2 Jet2::variable(double v, std::size_t axis, std::size_t axes, std::vector<Pair> pairs) {
  if (axis >= axes) throw UsageError("jet variable axis out of range");
  Jet2 j = constant(v, axes, std::move(pairs));
  j.d1[axis] = 1.0;
  return j;
}

double Jet2::second(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].first == a && pairs[p].second == b) return d2[p];
  }
  throw UsageError("second derivative (" + std::to_string(a) + "," + std::to_string(b) +
                   ") was not declared");
}

namespace {

void require_compatible(const Jet2& a, const Jet2& b) {
  if (a.d1.size() != b.d1.size() || a.pairs != b.pairs) {
    throw UsageError("jets declared over different axes");
  }
}

}  // namespace

Jet2& Jet2::operator+=(const Jet2& o) {
  require_compatible(*this, o);
  value += o.value;
  for (std::size_t i = 0; i < d1.size(); ++i) d1[i] += o.d1[i];
  for (std::size_t p = 0; p < d2.size(); ++p) d2[p] += o.d2[p];
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  require_compatible(*this, o);
  value -= o.value;
  for (std::size_t i = 0; i < d1.size(); ++i) d1[i] -= o.d1[i];
  for (std::size_t p = 0; p < d2.size(); ++p) d2[p] -= o.d2[p];
  return *this;
}

Jet2& Jet2::operator*=(double s) {
  value *= s;
  for (double& v : d1) v *= s;
  for (double& v : d2) v *= s;
  return *this;
}

Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
Jet2 operator*(double s, Jet2 a) { return a *= s; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  require_compatible(a, b);
  Jet2 r = a;
  r.value = a.value * b.value;
  for (std::size_t i = 0; i < a.d1.size(); ++i) r.d1[i] = a.d1[i] * b.value + a.value * b.d1[i];
  for (std::size_t p = 0; p < a.d2.size(); ++p) {
    const auto [i, j] = a.pairs[p];
    r.d2[p] = a.d2[p] * b.value + a.d1[i] * b.d1[j] + a.d1[j] * b.d1[i] + a.value * b.d2[p];
  }
  return r;
}

Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.value);
  const double c = std::cos(a.value);
  Jet2 r = a;
  r.value = s;
  for (std::size_t i = 0; i < a.d1.size(); ++i) r.d1[i] = c * a.d1[i];
  for (std::size_t p = 0; p < a.d2.size(); ++p) {
    const auto [i, j] = a.pairs[p];
    r.d2[p] = c * a.d2[p] - s * a.d1[i] * a.d1[j];
  }
  return r;
}

Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.value);
  const double c = std::cos(a.value);
  Jet2 r = a;
  r.value = c;
  for (std::size_t i = 0; i < a.d1.size(); ++i) r.d1[i] = -s * a.d1[i];
  for (std::size_t p = 0; p < a.d2.size(); ++p) {
    const auto [i, j] = a.pairs[p];
    r.d2[p] = -s * a.d2[p] - c * a.d1[i] * a.d1[j];
  }
  return r;
}

std::vector<Jet2::Pair> all_pairs(std::size_t axes) {
  std::vector<Jet2::Pair> out;
  for (std::size_t a = 0; a < axes; ++a) {
    for (std::size_t b = a; b < axes; ++b) out.push_back({a, b});
  }
  return out;
}

std::vector<Jet2::Pair> diagonal_pairs(std::size_t axes) {
  std::vector<Jet2::Pair> out;
  for (std::size_t a = 0; a < axes; ++a) out.push_back({a, a});
  return out;
}

void JetRequest::validate(std::size_t input_dim) const {
  for (std::size_t axis : axes) {
    if (axis >= input_dim) {
      throw UsageError("jet axis " + std::to_string(axis) + " out of range for input_dim " +
                       std::to_string(input_dim));
    }
  }
  for (const auto& p : pairs) {
    if (p.first > p.second || p.second >= axes.size()) {
      throw UsageError("second-order pair refers to an undeclared axis");
    }
  }
}

// ---------------------------------------------------------------------------
// Batched tape

BatchJet BatchJet::zeros(Eigen::Index rows, Eigen::Index cols, std::size_t axes, std::size_t pairs) {
  BatchJet j;
  j.value = Matrix::Zero(rows, cols);
  j.d1.assign(axes, Matrix::Zero(rows, cols));
  j.d2.assign(pairs, Matrix::Zero(rows, cols));
  return j;
}

namespace {

BatchJet affine(const LayerParams& p, const LayerScaling& s, const BatchJet& a) {
  BatchJet z;
  z.value = s.weight_scale * (p.weight * a.value);
  z.value.colwise() += s.bias_scale * p.bias;
  z.d1.reserve(a.d1.size());
  for (const Matrix& m : a.d1) z.d1.push_back(s.weight_scale * (p.weight * m));
  z.d2.reserve(a.d2.size());
  for (const Matrix& m : a.d2) z.d2.push_back(s.weight_scale * (p.weight * m));
  return z;
}

BatchJet transpose_affine(const LayerParams& p, const LayerScaling& s, const BatchJet& zbar) {
  BatchJet abar;
  const Matrix wt = s.weight_scale * p.weight.transpose();
  abar.value = wt * zbar.value;
  for (const Matrix& m : zbar.d1) abar.d1.push_back(wt * m);
  for (const Matrix& m : zbar.d2) abar.d2.push_back(wt * m);
  return abar;
}

}  // namespace

namespace {

// One libm call per entry instead of separate sin and cos passes.
void sincos_elementwise(const Matrix& z, Matrix& s, Matrix& c) {
  const double* in = z.data();
  double* so = s.data();
  double* co = c.data();
  for (Eigen::Index i = 0; i < z.size(); ++i) ::sincos(in[i], &so[i], &co[i]);
}

}  // namespace

JetTape::JetTape(const SinusoidalNetwork& net, const Matrix& inputs, JetRequest request)
    : net_(net), request_(std::move(request)) {
  const auto& config = net.config();
  request_.validate(config.input_dim);
  if (inputs.rows() != static_cast<Eigen::Index>(config.input_dim)) {
    throw UsageError("input dimension mismatch: expected " + std::to_string(config.input_dim) +
                     ", got " + std::to_string(inputs.rows()));
  }
  const Eigen::Index batch = inputs.cols();
  const std::size_t axes = request_.axes.size();
  const std::size_t pairs = request_.pairs.size();

  BatchJet a = BatchJet::zeros(inputs.rows(), batch, axes, pairs);
  a.value = net.input_scale().asDiagonal() * inputs;
  for (std::size_t k = 0; k < axes; ++k) {
    const auto axis = static_cast<Eigen::Index>(request_.axes[k]);
    a.d1[k].row(axis).setConstant(net.input_scale()(axis));
  }

  const std::size_t last = net.layer_count() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    BatchJet z = affine(net.layer(l), net.scaling(l), a);
    inputs_.push_back(std::move(a));
    if (l == last) {
      output_ = std::move(z);
      break;
    }
    Matrix s(z.value.rows(), z.value.cols());
    Matrix c(z.value.rows(), z.value.cols());
    sincos_elementwise(z.value, s, c);
    BatchJet h;
    h.value = s;
    for (const Matrix& m : z.d1) h.d1.push_back(c.cwiseProduct(m));
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto [i, j] = request_.pairs[p];
      h.d2.push_back((c.array() * z.d2[p].array() - s.array() * z.d1[i].array() * z.d1[j].array())
                         .matrix());
    }
    pre_.push_back(std::move(z));
    sin_.push_back(std::move(s));
    cos_.push_back(std::move(c));
    a = std::move(h);
  }
}

std::vector<BatchJet> JetTape::preactivation_adjoints(const BatchJet& output_adjoint) const {
  if (output_adjoint.value.rows() != output_.value.rows() ||
      output_adjoint.value.cols() != output_.value.cols() ||
      output_adjoint.d1.size() != output_.d1.size() ||
      output_adjoint.d2.size() != output_.d2.size()) {
    throw UsageError("output adjoint does not match the recorded jet shape");
  }
  const std::size_t layers = net_.layer_count();
  std::vector<BatchJet> zbar(layers);
  zbar[layers - 1] = output_adjoint;
  for (std::size_t l = layers - 1; l > 0; --l) {
    const BatchJet abar = transpose_affine(net_.layer(l), net_.scaling(l), zbar[l]);
    // Pull back through h = sin(z) on hidden layer l - 1.
    const BatchJet& z = pre_[l - 1];
    const auto s = sin_[l - 1].array();
    const auto c = cos_[l - 1].array();
    BatchJet& out = zbar[l - 1];
    out.value = (c * abar.value.array()).matrix();
    out.d1.resize(abar.d1.size());
    for (std::size_t a = 0; a < abar.d1.size(); ++a) {
      out.d1[a] = (c * abar.d1[a].array()).matrix();
      out.value.array() -= s * abar.d1[a].array() * z.d1[a].array();
    }
    out.d2.resize(abar.d2.size());
    for (std::size_t p = 0; p < abar.d2.size(); ++p) {
      const auto [i, j] = request_.pairs[p];
      const auto g = abar.d2[p].array();
      out.d2[p] = (c * g).matrix();
      out.value.array() -= g * (s * z.d2[p].array() + c * z.d1[i].array() * z.d1[j].array());
      out.d1[i].array() -= g * s * z.d1[j].array();
      out.d1[j].array() -= g * s * z.d1[i].array();
    }
  }
  return zbar;
}

ParamGradient JetTape::backward(const BatchJet& output_adjoint) const {
  const auto zbar = preactivation_adjoints(output_adjoint);
  ParamGradient grad;
  grad.layers.resize(zbar.size());
  for (std::size_t l = 0; l < zbar.size(); ++l) {
    const auto& s = net_.scaling(l);
    const BatchJet& a = inputs_[l];
    Matrix gw = zbar[l].value * a.value.transpose();
    for (std::size_t k = 0; k < a.d1.size(); ++k) gw.noalias() += zbar[l].d1[k] * a.d1[k].transpose();
    for (std::size_t p = 0; p < a.d2.size(); ++p) gw.noalias() += zbar[l].d2[p] * a.d2[p].transpose();
    grad.layers[l].weight = s.weight_scale * gw;
    grad.layers[l].bias = s.bias_scale * zbar[l].value.rowwise().sum();
  }
  return grad;
}

// ---------------------------------------------------------------------------
// ParamGradient

ParamGradient ParamGradient::zeros_like(const SinusoidalNetwork& net) {
  ParamGradient g;
  for (const auto& p : net.layers()) {
    g.layers.push_back({Matrix::Zero(p.weight.rows(), p.weight.cols()), Vector::Zero(p.bias.size())});
  }
  return g;
}

double ParamGradient::dot(const ParamGradient& other) const {
  if (other.layers.size() != layers.size()) throw UsageError("gradient shapes differ");
  double acc = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    acc += layers[l].weight.cwiseProduct(other.layers[l].weight).sum();
    acc += layers[l].bias.dot(other.layers[l].bias);
  }
  return acc;
}

ParamGradient& ParamGradient::operator+=(const ParamGradient& other) {
  if (other.layers.size() != layers.size()) throw UsageError("gradient shapes differ");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].weight += other.layers[l].weight;
    layers[l].bias += other.layers[l].bias;
  }
  return *this;
}

// ---------------------------------------------------------------------------

namespace {

Matrix column(std::span<const double> x) {
  return Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
}

void check_output_index(const SinusoidalNetwork& net, std::size_t k) {
  if (k >= net.config().output_dim) {
    throw UsageError("output index " + std::to_string(k) + " out of range");
  }
}

}  // namespace

ParamGradient param_gradient(const SinusoidalNetwork& net, std::span<const double> x,
                             std::size_t output_index) {
  check_output_index(net, output_index);
  JetTape tape(net, column(x), {});
  BatchJet adj = BatchJet::zeros(tape.output().value.rows(), 1, 0, 0);
  adj.value(static_cast<Eigen::Index>(output_index), 0) = 1.0;
  return tape.backward(adj);
}

std::vector<Jet2> input_jet(const SinusoidalNetwork& net, std::span<const double> x,
                            const std::vector<std::size_t>& axes, int order) {
  if (order != 1 && order != 2) throw UsageError("jet order must be 1 or 2");
  JetRequest request{axes, order == 2 ? all_pairs(axes.size()) : std::vector<Jet2::Pair>{}};
  JetTape tape(net, column(x), request);
  const BatchJet& out = tape.output();
  std::vector<Jet2> jets;
  for (Eigen::Index k = 0; k < out.value.rows(); ++k) {
    Jet2 j = Jet2::constant(out.value(k, 0), axes.size(), request.pairs);
    for (std::size_t a = 0; a < axes.size(); ++a) j.d1[a] = out.d1[a](k, 0);
    for (std::size_t p = 0; p < request.pairs.size(); ++p) j.d2[p] = out.d2[p](k, 0);
    jets.push_back(std::move(j));
  }
  return jets;
}

Matrix ntk_gram(const SinusoidalNetwork& net, const Matrix& inputs, std::size_t output_index) {
  check_output_index(net, output_index);
  JetTape tape(net, inputs, {});
  BatchJet adj = BatchJet::zeros(tape.output().value.rows(), tape.batch(), 0, 0);
  adj.value.row(static_cast<Eigen::Index>(output_index)).setOnes();
  const auto zbar = tape.preactivation_adjoints(adj);
  const Eigen::Index b = tape.batch();
  Matrix gram = Matrix::Zero(b, b);
  for (std::size_t l = 0; l < zbar.size(); ++l) {
    const auto& s = net.scaling(l);
    const Matrix& zb = zbar[l].value;
    const Matrix& a = tape.layer_input(l).value;
    const Matrix zz = zb.transpose() * zb;
    const Matrix aa = a.transpose() * a;
    gram += (s.weight_scale * s.weight_scale) * zz.cwiseProduct(aa) + (s.bias_scale * s.bias_scale) * zz;
  }
  return gram;
}

}  // namespace sinnet
