#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "sinnet/error.hpp"
#include "sinnet/signal.hpp"

using namespace sinnet;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Independent oracle: Crank-Nicolson diffusion with Adams-Bashforth
// advection in conservative form, Dirichlet u = 0 at both ends.
std::vector<double> finite_difference_burgers(double nu, double t_end, std::size_t nx, std::size_t steps) {
  const double h = 2.0 / static_cast<double>(nx - 1);
  const double dt = t_end / static_cast<double>(steps);
  std::vector<double> u(nx), prev_adv(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) u[i] = -std::sin(std::numbers::pi * (-1.0 + h * static_cast<double>(i)));
  u.front() = u.back() = 0.0;
  const double r = nu * dt / (2.0 * h * h);
  std::vector<double> adv(nx), rhs(nx), cp(nx), dp(nx);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 1; i + 1 < nx; ++i) adv[i] = (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) / (4.0 * h);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double a = s == 0 ? adv[i] : 1.5 * adv[i] - 0.5 * prev_adv[i];
      rhs[i] = u[i] + r * (u[i + 1] - 2.0 * u[i] + u[i - 1]) - dt * a;
    }
    // Thomas algorithm for (1 + 2r) u_i - r u_{i-1} - r u_{i+1} = rhs_i.
    const double diag = 1.0 + 2.0 * r;
    cp[1] = -r / diag;
    dp[1] = rhs[1] / diag;
    for (std::size_t i = 2; i + 1 < nx; ++i) {
      const double m = diag + r * cp[i - 1];
      cp[i] = -r / m;
      dp[i] = (rhs[i] + r * dp[i - 1]) / m;
    }
    u[nx - 2] = dp[nx - 2];
    for (std::size_t i = nx - 3; i >= 1; --i) u[i] = dp[i] - cp[i] * u[i + 1];
    prev_adv = adv;
  }
  return u;
}

}  // namespace

TEST(Burgers, InitialAndBoundaryConditions) {
  EXPECT_NEAR(burgers_exact(kBurgersNu, 0.0, 0.5), -1.0, 1e-12);
  EXPECT_NEAR(burgers_exact(kBurgersNu, 0.0, -0.3), std::sin(std::numbers::pi * 0.3), 1e-12);
  for (double t : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(burgers_exact(kBurgersNu, t, 0.0), 0.0, 1e-10);
    EXPECT_NEAR(burgers_exact(kBurgersNu, t, 1.0), 0.0, 1e-8);
    EXPECT_NEAR(burgers_exact(kBurgersNu, t, -1.0), 0.0, 1e-8);
  }
}

TEST(Burgers, OddInSpace) {
  for (double x : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(burgers_exact(kBurgersNu, 0.6, x), -burgers_exact(kBurgersNu, 0.6, -x), 1e-10);
  }
}

TEST(Burgers, MatchesFiniteDifferences) {
  const double t = 0.25;
  const std::size_t nx = 2001;
  const auto fd = finite_difference_burgers(kBurgersNu, t, nx, 5000);
  const auto xs = linspace(-1.0, 1.0, nx);
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < nx; i += 20) {
    const double e = burgers_exact(kBurgersNu, t, xs[i]) - fd[i];
    sq += e * e;
    ++count;
  }
  EXPECT_LT(std::sqrt(sq / static_cast<double>(count)), 1e-4);
}

TEST(Burgers, SatisfiesThePde) {
  const double nu = kBurgersNu, h = 1e-3, k = 1e-4;
  for (double t : {0.3, 0.7}) {
    for (double x : {-0.6, -0.2, 0.4}) {
      auto u = [&](double tt, double xx) { return burgers_exact(nu, tt, xx); };
      const double ut = (u(t + k, x) - u(t - k, x)) / (2 * k);
      const double ux = (u(t, x + h) - u(t, x - h)) / (2 * h);
      const double uxx = (u(t, x + h) - 2 * u(t, x) + u(t, x - h)) / (h * h);
      EXPECT_NEAR(ut + u(t, x) * ux - nu * uxx, 0.0, 1e-3) << t << " " << x;
    }
  }
}

TEST(Burgers, GridLayoutAndDataset) {
  const auto grid = burgers_solution(kBurgersNu, linspace(0.0, 0.99, 6), linspace(-1.0, 1.0, 33));
  ASSERT_EQ(grid.u.size(), 6u * 33u);
  EXPECT_NEAR(grid.at(0, 8), burgers_exact(kBurgersNu, 0.0, grid.x[8]), 1e-14);
  EXPECT_NEAR(grid.at(4, 20), burgers_exact(kBurgersNu, grid.t[4], grid.x[20]), 1e-14);

  const auto a = sample_dataset(grid, 100, 7);
  const auto b = sample_dataset(grid, 100, 7);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.t, b.t);
  std::set<std::pair<double, double>> unique;
  for (std::size_t i = 0; i < a.size(); ++i) unique.insert({a.t[i], a.x[i]});
  EXPECT_EQ(unique.size(), 100u);
  EXPECT_DOUBLE_EQ(a.lambda1, 1.0);
  EXPECT_DOUBLE_EQ(a.lambda2, kBurgersNu);
  EXPECT_THROW(sample_dataset(grid, 6 * 33 + 1, 0), UsageError);
}

TEST(Burgers, SamplingIsUniform) {
  const auto grid = burgers_solution(kBurgersNu, linspace(0.0, 0.99, 10), linspace(-1.0, 1.0, 20));
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto d = sample_dataset(grid, 20, seed);
    for (double t : d.t) hits[static_cast<std::size_t>(std::lround(t / 0.11))]++;
  }
  // Each time slice expects 800 hits; allow 5 sigma.
  for (int h : hits) EXPECT_NEAR(h, 800, 5 * std::sqrt(800.0));
}
