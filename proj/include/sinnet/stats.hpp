#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sinnet {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by n)
  std::size_t count = 0;
};

/// Mean and variance via Welford's update.
Summary summarize(std::span<const double> values);

/// Pairwise (cascade) summation; result depends only on the element order.
double pairwise_sum(std::span<const double> values);

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

double median(std::vector<double> values);

}  // namespace sinnet
