#include <cmath>
#include <numbers>
#include <utility>

#include "sinnet/error.hpp"
#include "sinnet/parallel.hpp"
#include "sinnet/spectral.hpp"

namespace sinnet {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void radix2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles computed directly rather than by repeated multiplication,
    // which drifts for long transforms.
    std::vector<Complex> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      tw[k] = Complex(std::cos(ang), std::sin(ang));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

void direct(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // Reduce the index product mod n to keep the angle small.
      const std::size_t m = (k * j) % n;
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      acc += a[j] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  a = std::move(out);
}

// Transforms every line along `axis` of a row-major array.
void transform_axis(std::vector<Complex>& data, const std::vector<std::size_t>& sizes, std::size_t axis,
                    bool inverse) {
  std::size_t stride = 1;
  for (std::size_t a = axis + 1; a < sizes.size(); ++a) stride *= sizes[a];
  const std::size_t n = sizes[axis];
  const std::size_t outer = data.size() / (n * stride);
  const std::size_t lines = outer * stride;
  parallel_for(lines, [&](std::size_t line) {
    const std::size_t o = line / stride;
    const std::size_t s = line % stride;
    const std::size_t base = o * n * stride + s;
    std::vector<Complex> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = data[base + i * stride];
    fft_inplace(buf, inverse);
    for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = buf[i];
  });
}

}  // namespace

void fft_inplace(std::vector<Complex>& data, bool inverse) {
  if (data.empty()) return;
  if (is_power_of_two(data.size())) {
    radix2(data, inverse);
  } else {
    direct(data, inverse);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
  }
}

Spectrum dft(const Signal& signal) {
  if (signal.empty()) throw UsageError("cannot transform an empty signal");
  Spectrum s;
  s.axis_sizes = signal.axis_sizes();
  s.coeffs.assign(signal.values().begin(), signal.values().end());
  for (std::size_t axis = 0; axis < s.axis_sizes.size(); ++axis) {
    transform_axis(s.coeffs, s.axis_sizes, axis, false);
  }
  return s;
}

Signal idft(const Spectrum& spectrum) {
  if (spectrum.coeffs.empty()) throw UsageError("cannot invert an empty spectrum");
  std::vector<Complex> data = spectrum.coeffs;
  for (std::size_t axis = 0; axis < spectrum.axis_sizes.size(); ++axis) {
    transform_axis(data, spectrum.axis_sizes, axis, true);
  }
  std::vector<double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) values[i] = data[i].real();
  return Signal(spectrum.axis_sizes, std::move(values));
}

}  // namespace sinnet
