#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "sinnet/error.hpp"
#include "sinnet/spectral.hpp"
#include "sinnet/stats.hpp"

namespace sinnet {

namespace {

// Largest |signed frequency| over all axes, for every bin.
std::vector<long> bin_linf_frequency(const std::vector<std::size_t>& sizes, std::size_t total) {
  std::vector<long> out(total, 0);
  std::vector<std::size_t> idx(sizes.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    long m = 0;
    for (std::size_t a = 0; a < sizes.size(); ++a) m = std::max(m, std::labs(signed_frequency(idx[a], sizes[a])));
    out[flat] = m;
    for (std::size_t a = sizes.size(); a-- > 0;) {
      if (++idx[a] < sizes[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

void check_divisor(double divisor) {
  if (!(divisor > 0.0) || !std::isfinite(divisor)) throw UsageError("omega divisor must be positive");
}

}  // namespace

std::vector<LowpassPoint> lowpass_loss_curve(const Signal& signal, std::span<const double> cutoffs) {
  for (double c : cutoffs) {
    if (!(c >= 0.0)) throw UsageError("low-pass cutoffs must be non-negative");
  }
  const Spectrum spec = dft(signal);
  const std::size_t n = spec.coeffs.size();
  const auto freq = bin_linf_frequency(spec.axis_sizes, n);

  // By Parseval the reconstruction error is the energy of the removed bins.
  // Filtering and inverting explicitly costs one transform per cutoff, which
  // is cheap at the sizes used here and keeps the curve an honest
  // reconstruction loss.
  std::vector<LowpassPoint> curve;
  curve.reserve(cutoffs.size());
  for (double c : cutoffs) {
    Spectrum filtered = spec;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<double>(freq[i]) > c) filtered.coeffs[i] = 0.0;
    }
    const Signal rec = idft(filtered);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = rec[i] - signal[i];
      sq[i] = d * d;
    }
    curve.push_back({c, pairwise_sum(sq) / static_cast<double>(n)});
  }
  return curve;
}

std::vector<double> spectrum_max_freq(const Signal& signal, double energy_threshold) {
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) {
    throw UsageError("energy threshold must lie in (0, 1]");
  }
  const Spectrum spec = dft(signal);
  const auto& sizes = spec.axis_sizes;
  std::vector<double> result;
  for (std::size_t axis = 0; axis < sizes.size(); ++axis) {
    const std::size_t nyq = sizes[axis] / 2;
    std::vector<double> energy(nyq + 1, 0.0);
    std::size_t stride = 1;
    for (std::size_t a = axis + 1; a < sizes.size(); ++a) stride *= sizes[a];
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
      const std::size_t k = (i / stride) % sizes[axis];
      energy[static_cast<std::size_t>(std::labs(signed_frequency(k, sizes[axis])))] += std::norm(spec.coeffs[i]);
    }
    const double total = pairwise_sum(energy);
    if (total == 0.0) {
      result.push_back(0.0);
      continue;
    }
    // Relative slack absorbs rounding when the threshold is exactly 1.
    const double target = energy_threshold * total * (1.0 - 1e-12);
    double acc = 0.0;
    std::size_t f = 0;
    for (; f <= nyq; ++f) {
      acc += energy[f];
      if (acc >= target) break;
    }
    result.push_back(static_cast<double>(std::min(f, nyq)));
  }
  return result;
}

OmegaSuggestion suggest_omega_from_frequencies(std::span<const double> max_freq, double divisor) {
  check_divisor(divisor);
  if (max_freq.empty()) throw UsageError("need at least one axis");
  const double top = *std::max_element(max_freq.begin(), max_freq.end());
  if (!(top > 0.0)) throw UsageError("maximum frequency must be positive");
  OmegaSuggestion s;
  s.omega = top / divisor;
  s.max_freq_per_axis.assign(max_freq.begin(), max_freq.end());
  for (double f : max_freq) s.per_axis_scale.push_back(f / top);
  return s;
}

OmegaSuggestion suggest_omega_grid(std::span<const std::size_t> axis_counts, double divisor) {
  if (axis_counts.empty()) throw UsageError("grid needs at least one axis");
  std::vector<double> nyq;
  for (std::size_t c : axis_counts) {
    if (c == 0) throw UsageError("grid axis counts must be positive");
    nyq.push_back(static_cast<double>(c) / 2.0);
  }
  return suggest_omega_from_frequencies(nyq, divisor);
}

OmegaSuggestion suggest_omega_random(std::size_t n_points, std::span<const double> extents, double divisor) {
  check_divisor(divisor);
  if (n_points == 0) throw UsageError("random point count must be positive");
  if (extents.empty()) throw UsageError("need at least one axis extent");
  double log_mean = 0.0;
  for (double e : extents) {
    if (!(e > 0.0) || !std::isfinite(e)) throw UsageError("axis extents must be positive");
    log_mean += std::log(e);
  }
  const double d = static_cast<double>(extents.size());
  const double geo = std::exp(log_mean / d);
  const double rate = std::pow(static_cast<double>(n_points), 1.0 / d);
  OmegaSuggestion s;
  s.omega = rate / 2.0 / divisor;
  for (double e : extents) {
    s.per_axis_scale.push_back(e / geo);
    s.max_freq_per_axis.push_back(rate * e / geo / 2.0);
  }
  return s;
}

}  // namespace sinnet
