#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sinnet/error.hpp"
#include "sinnet/parallel.hpp"
#include "sinnet/random.hpp"
#include "sinnet/signal.hpp"

namespace sinnet {

namespace {

constexpr double kPi = std::numbers::pi;
// The heat-kernel weight is e^{-z^2}; beyond |z| = 9 it is below 1e-35.
constexpr double kZMax = 9.0;
constexpr int kPanels = 36;
constexpr unsigned kMaxDepth = 20;
constexpr double kRelTol = 1e-12;

}  // namespace

// Cole–Hopf: with eta = sqrt(4 nu t) z,
//   u = -int sin(pi (x - eta)) w(z) dz / int w(z) dz,
//   w(z) = exp(-z^2 - cos(pi (x - eta)) / (2 pi nu)).
// The exponent is shifted by its maximum over a scan so neither integral
// overflows.
double burgers_exact(double nu, double t, double x) {
  if (!(nu > 0.0)) throw UsageError("Burgers viscosity must be positive");
  if (t < 0.0) throw UsageError("Burgers time must be non-negative");
  if (t == 0.0) return -std::sin(kPi * x);
  const double scale = std::sqrt(4.0 * nu * t);
  const double inv = 1.0 / (2.0 * kPi * nu);
  auto exponent = [&](double z) { return -z * z - std::cos(kPi * (x - scale * z)) * inv; };

  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4000; ++i) {
    peak = std::max(peak, exponent(-kZMax + 2.0 * kZMax * i / 4000.0));
  }

  using boost::math::quadrature::gauss_kronrod;
  double num = 0.0;
  double den = 0.0;
  const double panel = 2.0 * kZMax / kPanels;
  for (int p = 0; p < kPanels; ++p) {
    const double a = -kZMax + p * panel;
    const double b = a + panel;
    double err = 0.0;
    double l1 = 0.0;
    den += gauss_kronrod<double, 31>::integrate([&](double z) { return std::exp(exponent(z) - peak); }, a, b,
                                                kMaxDepth, kRelTol, &err, &l1);
    if (err > 1e-10 * l1 + 1e-300 && err > 1e-14) {
      throw NumericalError("Burgers quadrature missed tolerance at t=" + std::to_string(t) +
                           ", x=" + std::to_string(x));
    }
    num += gauss_kronrod<double, 31>::integrate(
        [&](double z) { return std::sin(kPi * (x - scale * z)) * std::exp(exponent(z) - peak); }, a, b, kMaxDepth,
        kRelTol, &err, &l1);
    if (err > 1e-10 * l1 + 1e-300 && err > 1e-14) {
      throw NumericalError("Burgers quadrature missed tolerance at t=" + std::to_string(t) +
                           ", x=" + std::to_string(x));
    }
  }
  if (!(den > 0.0) || !std::isfinite(num)) throw NumericalError("Burgers quadrature produced a degenerate weight");
  return -num / den;
}

BurgersGrid burgers_solution(double nu, std::vector<double> t_grid, std::vector<double> x_grid) {
  if (t_grid.empty() || x_grid.empty()) throw UsageError("Burgers grid axes must be non-empty");
  for (double t : t_grid) {
    if (t < 0.0 || t > 1.0) throw UsageError("Burgers times must lie in [0, 1]");
  }
  for (double x : x_grid) {
    if (x < -1.0 || x > 1.0) throw UsageError("Burgers positions must lie in [-1, 1]");
  }
  BurgersGrid g;
  g.nu = nu;
  g.t = std::move(t_grid);
  g.x = std::move(x_grid);
  g.u.resize(g.t.size() * g.x.size());
  parallel_for(g.t.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < g.x.size(); ++j) g.u[i * g.x.size() + j] = burgers_exact(nu, g.t[i], g.x[j]);
  });
  return g;
}

PdeDataset sample_dataset(const BurgersGrid& grid, std::size_t n, std::uint64_t seed) {
  const std::size_t total = grid.u.size();
  if (n > total) {
    throw UsageError("requested " + std::to_string(n) + " samples from a grid of " + std::to_string(total));
  }
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher–Yates: the first n slots are a uniform sample.
  for (std::size_t k = 0; k < n; ++k) std::swap(idx[k], idx[k + rng.below(total - k)]);
  PdeDataset d;
  d.lambda2 = grid.nu;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t ti = idx[k] / grid.x.size();
    const std::size_t xi = idx[k] % grid.x.size();
    d.t.push_back(grid.t[ti]);
    d.x.push_back(grid.x[xi]);
    d.u.push_back(grid.u[idx[k]]);
  }
  return d;
}

}  // namespace sinnet
