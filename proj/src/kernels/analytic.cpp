#include <cmath>
#include <string>

#include "sinnet/error.hpp"
#include "sinnet/kernels.hpp"

namespace sinnet {

void KernelSpec::validate() const {
  if (depth == 0) throw UsageError("kernel depth must be at least 1");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw UsageError("kernel omega must be positive");
  if (family == KernelFamily::kSiren && (!(c > 0.0) || !std::isfinite(c))) {
    throw UsageError("SIREN bound c must be positive");
  }
}

double KernelSpec::weight_variance() const {
  return family == KernelFamily::kSsn ? 1.0 : c * c / 3.0;
}

double sinc(double t) {
  if (std::abs(t) < 1e-8) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw UsageError("kernel inputs differ in length (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  if (x.empty()) throw UsageError("kernel inputs must be non-empty");
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * y[j];
  return acc;
}

double squared_distance(std::span<const double> x, std::span<const double> y, double sign) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] + sign * y[j];
    acc += d * d;
  }
  return acc;
}

double sinc_product(double scale, std::span<const double> x, std::span<const double> y, double sign) {
  double acc = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc *= sinc(scale * (x[j] + sign * y[j]));
  return acc;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what + " in kernel recursion");
}

// E[sin u sin v] and E[cos u cos v] for (u, v) ~ N(0, [[a, c], [c, b]]), in
// the form whose exponents are both <= 0 for a PSD covariance.
struct SineMoments {
  double sin_sin;
  double cos_cos;
};

SineMoments gaussian_sine_moments(const CovarianceTriple& k) {
  const double minus = std::exp(-0.5 * (k.xx - 2.0 * k.xy + k.yy));
  const double plus = std::exp(-0.5 * (k.xx + 2.0 * k.xy + k.yy));
  return {0.5 * (minus - plus), 0.5 * (minus + plus)};
}

// E[sin^2 u] for u ~ N(0, a).
double sine_square(double a) { return 0.5 * (1.0 - std::exp(-2.0 * a)); }

}  // namespace

KernelTrace kernel_trace(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  spec.validate();
  check_lengths(x, y);
  const double w2 = spec.omega * spec.omega;
  const double v = spec.weight_variance();
  const double beta = KernelSpec::kBiasVariance;

  KernelTrace t;
  const CovarianceTriple input{w2 * (dot(x, x) + 1.0), w2 * (dot(y, y) + 1.0), w2 * (dot(x, y) + 1.0)};
  t.sigma.push_back(input);
  t.sigma_dot.push_back(0.0);
  t.theta.push_back(input.xy);

  for (std::size_t l = 1; l <= spec.depth; ++l) {
    CovarianceTriple next;
    double dot_xy = 0.0;
    if (l == 1 && spec.family == KernelFamily::kSiren) {
      // Uniform first-layer weights: characteristic function is a sinc product.
      const double scale = spec.c * spec.omega;
      const double damp = std::exp(-2.0 * w2);
      const double minus = sinc_product(scale, x, y, -1.0);
      const double plus = sinc_product(scale, x, y, 1.0);
      const double coeff = spec.c * spec.c / 6.0;
      next.xy = coeff * (minus - damp * plus) + beta;
      next.xx = coeff * (1.0 - damp * sinc_product(scale, x, x, 1.0)) + beta;
      next.yy = coeff * (1.0 - damp * sinc_product(scale, y, y, 1.0)) + beta;
      dot_xy = coeff * (minus + damp * plus);
    } else {
      // SSN layer 1 uses the same Gaussian step as deeper layers: its input
      // covariance is exactly omega^2 (x^T y + 1).
      const double layer_v = l == 1 ? 1.0 : v;
      const auto m = gaussian_sine_moments(t.sigma.back());
      next.xy = layer_v * m.sin_sin + beta;
      next.xx = layer_v * sine_square(t.sigma.back().xx) + beta;
      next.yy = layer_v * sine_square(t.sigma.back().yy) + beta;
      dot_xy = layer_v * m.cos_cos;
    }
    require_finite(next.xy, "NNGP");
    require_finite(dot_xy, "derivative kernel");
    const double theta = t.theta.back() * dot_xy + next.xy;
    require_finite(theta, "NTK");
    t.sigma.push_back(next);
    t.sigma_dot.push_back(dot_xy);
    t.theta.push_back(theta);
  }
  return t;
}

double nngp(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  return kernel_trace(spec, x, y).sigma.back().xy;
}

double ntk(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  return kernel_trace(spec, x, y).theta.back();
}

double kernel(KernelKind kind, const KernelSpec& spec, std::span<const double> x,
              std::span<const double> y) {
  return kind == KernelKind::kNngp ? nngp(spec, x, y) : ntk(spec, x, y);
}

double shallow_ssn_nngp(double omega, std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double w2 = omega * omega;
  const double minus = std::exp(-0.5 * w2 * squared_distance(x, y, -1.0));
  const double plus = std::exp(-0.5 * w2 * squared_distance(x, y, 1.0)) * std::exp(-2.0 * w2);
  return 0.5 * (minus - plus) + 1.0;
}

double shallow_ssn_ntk(double omega, std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double w2 = omega * omega;
  const double lin = w2 * (dot(x, y) + 1.0);
  const double minus = std::exp(-0.5 * w2 * squared_distance(x, y, -1.0));
  const double plus = std::exp(-0.5 * w2 * squared_distance(x, y, 1.0)) * std::exp(-2.0 * w2);
  return 0.5 * (lin + 1.0) * minus + 0.5 * (lin - 1.0) * plus + 1.0;
}

double shallow_siren_nngp(double omega, double c, std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double scale = c * omega;
  const double damp = std::exp(-2.0 * omega * omega);
  return c * c / 6.0 * (sinc_product(scale, x, y, -1.0) - damp * sinc_product(scale, x, y, 1.0)) + 1.0;
}

double shallow_siren_ntk(double omega, double c, std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double w2 = omega * omega;
  const double lin = w2 * (dot(x, y) + 1.0);
  const double scale = c * omega;
  const double damp = std::exp(-2.0 * w2);
  const double coeff = c * c / 6.0;
  return coeff * (lin + 1.0) * sinc_product(scale, x, y, -1.0) +
         coeff * (lin - 1.0) * damp * sinc_product(scale, x, y, 1.0) + 1.0;
}

double reference_kernel(ReferenceKind kind, double omega, double c, std::span<const double> dx) {
  if (!(omega > 0.0)) throw UsageError("reference kernel omega must be positive");
  if (kind == ReferenceKind::kGaussian) {
    double r2 = 0.0;
    for (double d : dx) r2 += d * d;
    return std::exp(-0.5 * omega * omega * r2);
  }
  double acc = 1.0;
  for (double d : dx) acc *= sinc(c * omega * d);
  return acc;
}

KernelSlice kernel_slice(KernelKind kind, const KernelSpec& spec, std::vector<double> center,
                         std::vector<double> offsets, std::size_t axis) {
  if (axis >= center.size()) throw UsageError("slice axis out of range");
  KernelSlice slice;
  slice.values.reserve(offsets.size());
  std::vector<double> x = center;
  for (double d : offsets) {
    x[axis] = center[axis] + d;
    slice.values.push_back(kernel(kind, spec, x, center));
  }
  slice.center = std::move(center);
  slice.offsets = std::move(offsets);
  return slice;
}

}  // namespace sinnet
