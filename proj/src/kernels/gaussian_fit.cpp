#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sinnet/error.hpp"
#include "sinnet/kernels.hpp"

namespace sinnet {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kStepTolerance = 1e-12;

double rms(const Eigen::VectorXd& r) { return std::sqrt(r.squaredNorm() / static_cast<double>(r.size())); }

Eigen::VectorXd residuals(const KernelSlice& s, double a, double w, double b) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(s.offsets.size()));
  for (std::size_t i = 0; i < s.offsets.size(); ++i) {
    const double d = s.offsets[i];
    r(static_cast<Eigen::Index>(i)) = a * std::exp(-d * d / (2.0 * w * w)) + b - s.values[i];
  }
  return r;
}

}  // namespace

GaussianFit gaussian_fit(const KernelSlice& slice) {
  if (slice.offsets.size() != slice.values.size()) {
    throw UsageError("slice offsets and values differ in length");
  }
  const std::size_t n = slice.offsets.size();
  if (n < 5) throw UsageError("Gaussian fit needs at least 5 slice points");
  for (double v : slice.values) {
    if (!std::isfinite(v)) throw NumericalError("non-finite value in kernel slice");
  }

  // Initial guess: baseline at the minimum, log-linear fit of the rest.
  const auto [lo, hi] = std::minmax_element(slice.values.begin(), slice.values.end());
  const double base0 = *lo;
  const double height0 = *hi - base0;
  if (!(height0 > 0.0)) throw NumericalError("flat slice has no peak to fit");

  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d atb = Eigen::Vector2d::Zero();
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double above = slice.values[i] - base0;
    if (above <= 0.1 * height0) continue;
    const Eigen::Vector2d row(1.0, slice.offsets[i] * slice.offsets[i]);
    ata += row * row.transpose();
    atb += row * std::log(above);
    ++used;
  }
  double a = height0;
  double w = 0.0;
  double b = base0;
  if (used >= 2 && std::abs(ata.determinant()) > 1e-300) {
    const Eigen::Vector2d coef = ata.ldlt().solve(atb);
    if (coef(1) < 0.0) {
      a = std::exp(coef(0));
      w = std::sqrt(-1.0 / (2.0 * coef(1)));
    }
  }
  if (!(w > 0.0) || !std::isfinite(w)) {
    // Fall back to the half-maximum width.
    double half = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (slice.values[i] - base0 >= 0.5 * height0) half = std::max(half, std::abs(slice.offsets[i]));
    }
    w = half > 0.0 ? half / std::sqrt(2.0 * std::log(2.0)) : 1.0;
  }

  // Gauss–Newton with Levenberg damping on (a, w, b).
  Eigen::VectorXd r = residuals(slice, a, w, b);
  double cost = r.squaredNorm();
  double lambda = 1e-6;
  GaussianFit fit;
  bool converged = false;
  int it = 0;
  for (; it < kMaxIterations && !converged; ++it) {
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = slice.offsets[i];
      const double g = std::exp(-d * d / (2.0 * w * w));
      const auto row = static_cast<Eigen::Index>(i);
      jac(row, 0) = g;
      jac(row, 1) = a * g * d * d / (w * w * w);
      jac(row, 2) = 1.0;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * r;
    bool accepted = false;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
      const double na = a + step(0);
      const double nw = w + step(1);
      const double nb = b + step(2);
      if (!(nw > 0.0) || !std::isfinite(na) || !std::isfinite(nb)) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd nr = residuals(slice, na, nw, nb);
      const double ncost = nr.squaredNorm();
      if (ncost <= cost) {
        const double rel = std::abs(step(0)) / (std::abs(na) + 1e-300) +
                           std::abs(step(1)) / nw +
                           std::abs(step(2)) / (std::abs(na) + std::abs(nb) + 1e-300);
        a = na;
        w = nw;
        b = nb;
        r = std::move(nr);
        converged = rel < kStepTolerance || cost - ncost <= 1e-15 * cost;
        cost = ncost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No descent direction left: already at a (numerical) minimum.
      converged = true;
    }
  }
  if (!converged) throw NumericalError("Gaussian fit did not converge");
  fit.peak = a;
  fit.width = w;
  fit.baseline = b;
  fit.rms_residual = rms(r);
  fit.iterations = static_cast<std::size_t>(it);
  return fit;
}

}  // namespace sinnet
