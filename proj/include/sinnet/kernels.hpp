#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sinnet {

enum class KernelFamily { kSsn, kSiren };
enum class KernelKind { kNngp, kNtk };
enum class ReferenceKind { kGaussian, kSinc };

/// Infinite-width kernel of an NTK-parametrized sine network.
///
/// Biases are standard normal throughout (bias variance 1). For SIREN every
/// weight is U(-c, c), so each layer past the input carries weight variance
/// c^2 / 3; for SSN weights are standard normal.
struct KernelSpec {
  KernelFamily family = KernelFamily::kSsn;
  std::size_t depth = 1;
  double omega = 1.0;
  double c = 2.449489742783178;  // sqrt(6)

  static constexpr double kBiasVariance = 1.0;

  void validate() const;
  /// Weight variance of every layer after the first.
  double weight_variance() const;
};

/// Unnormalized sinc, sin(t) / t, with the removable singularity patched by
/// its Taylor value for |t| < 1e-8.
double sinc(double t);

/// Covariances of one layer evaluated at (x, x), (y, y) and (x, y).
struct CovarianceTriple {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

/// Per-depth kernels. sigma[0] and theta[0] are the input-layer kernel
/// omega^2 (x^T y + 1); sigma_dot[0] is unused.
struct KernelTrace {
  std::vector<CovarianceTriple> sigma;
  std::vector<double> sigma_dot;
  std::vector<double> theta;
};

KernelTrace kernel_trace(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// NNGP covariance Sigma^(L)(x, y). Throws UsageError on length mismatch and
/// NumericalError on non-finite intermediates.
double nngp(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// NTK Theta^(L)(x, y) via Theta^(l) = Theta^(l-1) * SigmaDot^(l) + Sigma^(l).
double ntk(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

double kernel(KernelKind kind, const KernelSpec& spec, std::span<const double> x,
              std::span<const double> y);

// Single-hidden-layer closed forms, written out term by term.
double shallow_ssn_nngp(double omega, std::span<const double> x, std::span<const double> y);
double shallow_ssn_ntk(double omega, std::span<const double> x, std::span<const double> y);
double shallow_siren_nngp(double omega, double c, std::span<const double> x, std::span<const double> y);
double shallow_siren_ntk(double omega, double c, std::span<const double> x, std::span<const double> y);

/// GAUSSIAN: exp(-omega^2 |dx|^2 / 2). SINC: prod_j sinc(c omega dx_j).
double reference_kernel(ReferenceKind kind, double omega, double c, std::span<const double> dx);

/// Kernel values at center + offset * e_axis.
struct KernelSlice {
  std::vector<double> center;
  std::vector<double> offsets;
  std::vector<double> values;
};

KernelSlice kernel_slice(KernelKind kind, const KernelSpec& spec, std::vector<double> center,
                         std::vector<double> offsets, std::size_t axis = 0);

/// Least-squares fit of peak * exp(-dx^2 / (2 width^2)) + baseline.
struct GaussianFit {
  double peak = 0.0;  // height above baseline
  double width = 0.0;
  double baseline = 0.0;
  double rms_residual = 0.0;
  std::size_t iterations = 0;
};

/// Log-domain linear fit on points above 10% of the peak, then Gauss–Newton
/// refinement of all three parameters. Throws UsageError for slices with
/// fewer than 5 points and NumericalError when the refinement does not
/// converge.
GaussianFit gaussian_fit(const KernelSlice& slice);

}  // namespace sinnet
