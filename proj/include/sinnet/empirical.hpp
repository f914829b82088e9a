#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sinnet/network.hpp"

namespace sinnet {

/// Finite-width Monte-Carlo estimator settings. Draw i uses seed
/// base_seed + i and the same width on every hidden layer.
struct EstimatorConfig {
  std::size_t width = 1024;
  std::size_t n_draws = 16;
  std::uint64_t base_seed = 0;

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mean and standard error of per-draw values; the mean uses pairwise
/// summation so it does not depend on how draws were scheduled.
Estimate summarize_draws(std::span<const double> draws);

/// <grad f(x), grad f(y)> over independent initializations. Requires NTK
/// parametrization and a scalar output.
Estimate empirical_ntk(const NetworkConfig& config, const EstimatorConfig& est,
                       std::span<const double> x, std::span<const double> y);

/// Output covariance at (x, y), estimated per draw by the covariance of the
/// output layer conditioned on the last hidden layer.
Estimate empirical_nngp(const NetworkConfig& config, const EstimatorConfig& est,
                        std::span<const double> x, std::span<const double> y);

/// Kernel between `center` and each point, sharing draws across points.
/// Points are columns of an input_dim x P matrix.
std::vector<Estimate> empirical_ntk_slice(const NetworkConfig& config, const EstimatorConfig& est,
                                          std::span<const double> center, const Matrix& points);
std::vector<Estimate> empirical_nngp_slice(const NetworkConfig& config, const EstimatorConfig& est,
                                           std::span<const double> center, const Matrix& points);

}  // namespace sinnet
