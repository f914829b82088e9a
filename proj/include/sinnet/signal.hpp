#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sinnet/error.hpp"
#include "sinnet/network.hpp"

namespace sinnet {

/// Sampled d-dimensional grid in row-major order (last axis fastest).
///
/// Grid index i on an axis of N samples maps to the cell center
/// -1 + 2 (i + 0.5) / N of the canonical domain [-1, 1].
class Signal {
 public:
  Signal() = default;
  /// Throws UsageError when values.size() != prod(axis_sizes), any axis is
  /// zero, or a value is non-finite.
  Signal(std::vector<std::size_t> axis_sizes, std::vector<double> values);

  const std::vector<std::size_t>& axis_sizes() const { return axis_sizes_; }
  std::size_t ndim() const { return axis_sizes_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::vector<std::size_t> unravel(std::size_t flat) const;
  std::size_t ravel(std::span<const std::size_t> index) const;

  static double coordinate(std::size_t index, std::size_t axis_size) {
    return -1.0 + 2.0 * (static_cast<double>(index) + 0.5) / static_cast<double>(axis_size);
  }

  /// Normalized coordinates of every sample, as columns (ndim x size).
  Matrix coordinates() const;

 private:
  std::vector<std::size_t> axis_sizes_;
  std::vector<double> values_;
};

/// Checkerboard partition: true marks training samples (even index sum).
struct SplitMask {
  std::vector<std::size_t> axis_sizes;
  std::vector<bool> train;
};

struct PointSet {
  Matrix points;  // ndim x count
  Vector values;
};

struct CheckerboardSplit {
  PointSet train;
  PointSet test;
  SplitMask mask;
};

CheckerboardSplit checkerboard_split(const Signal& signal);

// --- File formats -----------------------------------------------------------

enum class SignalFormat { kPgm, kWav, kCsvGrid };

enum class FormatErrorKind { kMalformedHeader, kTruncatedPayload, kUnsupportedBitDepth, kUnsupportedLayout };

/// Rejected input file; `kind` tells which check failed.
class FormatError : public DataError {
 public:
  FormatError(FormatErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// PGM (binary P5, 8-bit) -> 2D signal in [0, 1], axes (rows, cols).
/// WAV (RIFF PCM16 mono) -> 1D signal in [-1, 1).
/// CSV_GRID ("shape:d1,...,dk" then one value per line) -> k-D signal.
/// Throws FormatError for malformed content and DataError for I/O failures.
Signal load_signal(const std::filesystem::path& path, SignalFormat format);
Signal parse_pgm(std::span<const std::uint8_t> bytes);
Signal parse_wav(std::span<const std::uint8_t> bytes);
Signal parse_csv_grid(const std::string& text);

/// Clamps to [0, 1] and quantizes with round-half-up to 8 bits.
void write_pgm(const Signal& signal, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const Signal& signal);
void write_csv_grid(const Signal& signal, const std::filesystem::path& path);
/// Named columns, comma separated, LF endings, 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);
/// Little-endian PCM16 mono, for round trips and fixtures.
std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> samples, std::uint32_t sample_rate);

// --- Synthesis ---------------------------------------------------------------

/// cos(128 pi x) + cos(32 pi y) on [-1, 1]^2 with n samples per axis
/// (x along axis 0). Rejects n <= 256, where 128 reaches Nyquist.
Signal synth_two_frequency(std::size_t n);

/// cos(fx pi x) + cos(fy pi y) with the given per-axis frequencies. Rejects
/// grids whose Nyquist (n / 2) does not exceed each frequency.
Signal synth_cosines(std::size_t n, double freq_x, double freq_y);

/// Sum of `terms` cosines with integer frequencies per axis in [0, max_freq]
/// (one term pinned at max_freq on axis 0) and random phases; scaled to unit
/// RMS. Deterministic per seed.
Signal synth_bandlimited(std::size_t n, std::size_t max_freq, std::size_t terms, std::uint64_t seed);

/// Smooth 2D image in [0, 1]: a few broad Gaussian bumps. `gradient` receives
/// the analytic partials in normalized coordinates when non-null.
Signal synth_smooth_image(std::size_t n, std::uint64_t seed, std::vector<Signal>* gradient = nullptr,
                          Signal* laplacian = nullptr);

// --- Burgers ground truth ----------------------------------------------------

/// u(t, x) on a tensor grid, t-major.
struct BurgersGrid {
  double nu = 0.0;
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> u;  // u[i * x.size() + j] = u(t[i], x[j])

  double at(std::size_t ti, std::size_t xi) const { return u[ti * x.size() + xi]; }
};

/// Exact solution of u_t + u u_x = nu u_xx with u(0, x) = -sin(pi x) and
/// u(t, +-1) = 0, via the Cole–Hopf transform and adaptive Gauss–Kronrod
/// quadrature. Throws NumericalError if a quadrature misses its tolerance.
double burgers_exact(double nu, double t, double x);
BurgersGrid burgers_solution(double nu, std::vector<double> t_grid, std::vector<double> x_grid);

inline constexpr double kBurgersNu = 0.01 / 3.14159265358979323846;

struct PdeDataset {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> u;
  double lambda1 = 1.0;
  double lambda2 = kBurgersNu;

  std::size_t size() const { return u.size(); }
};

/// Uniform sample without replacement; throws UsageError when n exceeds the
/// grid size.
PdeDataset sample_dataset(const BurgersGrid& grid, std::size_t n, std::uint64_t seed);

}  // namespace sinnet
