#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sinnet/error.hpp"
#include "sinnet/random.hpp"
#include "sinnet/signal.hpp"

namespace sinnet {

namespace {

constexpr double kPi = std::numbers::pi;

template <typename F>
Signal grid2(std::size_t n, F&& f) {
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = Signal::coordinate(i, n);
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = f(x, Signal::coordinate(j, n));
  }
  return Signal({n, n}, std::move(v));
}

}  // namespace

Signal synth_two_frequency(std::size_t n) {
  if (n <= 256) {
    throw UsageError("two-frequency signal needs n > 256 (got " + std::to_string(n) +
                     "); the 128 component sits at or above Nyquist");
  }
  return synth_cosines(n, 128.0, 32.0);
}

Signal synth_cosines(std::size_t n, double freq_x, double freq_y) {
  if (n == 0) throw UsageError("grid size must be positive");
  const double nyq = static_cast<double>(n) / 2.0;
  if (!(freq_x >= 0.0 && freq_x < nyq && freq_y >= 0.0 && freq_y < nyq)) {
    throw UsageError("frequencies must lie below the grid Nyquist " + std::to_string(nyq));
  }
  return grid2(n, [&](double x, double y) { return std::cos(freq_x * kPi * x) + std::cos(freq_y * kPi * y); });
}

Signal synth_bandlimited(std::size_t n, std::size_t max_freq, std::size_t terms, std::uint64_t seed) {
  if (terms == 0) throw UsageError("band-limited signal needs at least one term");
  if (max_freq == 0 || 2 * max_freq >= n) {
    throw UsageError("max frequency must be positive and below the grid Nyquist");
  }
  Rng rng(seed);
  struct Term {
    double fx, fy, phase, amp;
  };
  std::vector<Term> ts;
  for (std::size_t k = 0; k < terms; ++k) {
    Term t;
    t.fx = k == 0 ? static_cast<double>(max_freq) : static_cast<double>(rng.below(max_freq + 1));
    t.fy = static_cast<double>(rng.below(max_freq + 1));
    t.phase = rng.uniform(0.0, 2.0 * kPi);
    t.amp = rng.uniform(0.5, 1.0);
    ts.push_back(t);
  }
  Signal raw = grid2(n, [&](double x, double y) {
    double acc = 0.0;
    for (const auto& t : ts) acc += t.amp * std::cos(t.fx * kPi * x + t.phase) * std::cos(t.fy * kPi * y);
    return acc;
  });
  double ms = 0.0;
  for (double v : raw.values()) ms += v * v;
  const double scale = 1.0 / std::sqrt(ms / static_cast<double>(raw.size()));
  std::vector<double> v(raw.values().begin(), raw.values().end());
  for (double& e : v) e *= scale;
  return Signal(raw.axis_sizes(), std::move(v));
}

Signal synth_smooth_image(std::size_t n, std::uint64_t seed, std::vector<Signal>* gradient, Signal* laplacian) {
  if (n < 2) throw UsageError("smooth image needs n >= 2");
  Rng rng(seed);
  struct Bump {
    double cx, cy, s, a;
  };
  std::vector<Bump> bumps;
  for (int k = 0; k < 5; ++k) {
    bumps.push_back({rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(0.25, 0.5),
                     (k == 4 ? -1.0 : 1.0) * rng.uniform(0.5, 1.0)});
  }
  std::vector<double> g(n * n), gx(n * n), gy(n * n), lap(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = Signal::coordinate(i, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double y = Signal::coordinate(j, n);
      const std::size_t at = i * n + j;
      for (const auto& b : bumps) {
        const double dx = x - b.cx;
        const double dy = y - b.cy;
        const double s2 = b.s * b.s;
        const double e = b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
        g[at] += e;
        gx[at] -= e * dx / s2;
        gy[at] -= e * dy / s2;
        lap[at] += e * ((dx * dx + dy * dy) / (s2 * s2) - 2.0 / s2);
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  const double base = *lo;
  const double inv = 1.0 / (*hi - base);
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] = (g[k] - base) * inv;
    gx[k] *= inv;
    gy[k] *= inv;
    lap[k] *= inv;
  }
  if (gradient) *gradient = {Signal({n, n}, std::move(gx)), Signal({n, n}, std::move(gy))};
  if (laplacian) *laplacian = Signal({n, n}, std::move(lap));
  return Signal({n, n}, std::move(g));
}

}  // namespace sinnet
