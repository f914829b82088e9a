#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sinnet/signal.hpp"

namespace sinnet {

using Complex = std::complex<double>;

/// In-place 1D transform. Radix-2 for power-of-two lengths, direct O(N^2)
/// sum otherwise. The forward direction is unnormalized; the inverse
/// divides by N.
void fft_inplace(std::vector<Complex>& data, bool inverse);

/// Coefficients on the same row-major grid as the source signal. Bin k on an
/// axis of N samples has signed frequency k for k <= N/2 and k - N above.
struct Spectrum {
  std::vector<std::size_t> axis_sizes;
  std::vector<Complex> coeffs;
};

/// Separable N-d transform. Throws UsageError on an empty signal.
Spectrum dft(const Signal& signal);
/// Real part of the inverse transform.
Signal idft(const Spectrum& spectrum);

/// Signed frequency of bin k on an axis of n samples.
inline long signed_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<long>(k);
  return 2 * k <= n ? kk : kk - static_cast<long>(n);
}

struct LowpassPoint {
  double cutoff = 0.0;
  double mse = 0.0;
};

/// MSE between the signal and its reconstruction with every bin whose
/// |frequency| exceeds the cutoff on any axis set to zero.
std::vector<LowpassPoint> lowpass_loss_curve(const Signal& signal, std::span<const double> cutoffs);

/// Per axis, the smallest F such that bins with |f_axis| <= F carry at least
/// `energy_threshold` of the total energy. Threshold must lie in (0, 1].
std::vector<double> spectrum_max_freq(const Signal& signal, double energy_threshold);

struct OmegaSuggestion {
  double omega = 0.0;
  std::vector<double> per_axis_scale;
  std::vector<double> max_freq_per_axis;
};

inline constexpr double kDefaultOmegaDivisor = 8.0;

/// Grid of axis_counts samples: per-axis Nyquist count/2, omega = max/divisor,
/// scales normalized to a maximum of 1.
OmegaSuggestion suggest_omega_grid(std::span<const std::size_t> axis_counts,
                                   double divisor = kDefaultOmegaDivisor);

/// n scattered points in a box with the given extents. Per-axis rate is
/// n^(1/d) times extent_j over the geometric-mean extent; omega uses the
/// geometric-mean rate n^(1/d) / 2 / divisor and the scales are the extent
/// ratios.
OmegaSuggestion suggest_omega_random(std::size_t n_points, std::span<const double> extents,
                                     double divisor = kDefaultOmegaDivisor);

/// From measured per-axis maximum frequencies (e.g. spectrum_max_freq).
OmegaSuggestion suggest_omega_from_frequencies(std::span<const double> max_freq,
                                               double divisor = kDefaultOmegaDivisor);

}  // namespace sinnet
