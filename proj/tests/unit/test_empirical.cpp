#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sinnet/empirical.hpp"
#include "sinnet/error.hpp"
#include "sinnet/kernels.hpp"
#include "sinnet/stats.hpp"

using namespace sinnet;

namespace {

NetworkConfig ntk_config(std::size_t depth, double omega, InitScheme init = InitScheme::kSsnNormal) {
  NetworkConfig c;
  c.input_dim = 1;
  c.hidden_widths.assign(depth, 1);
  c.output_dim = 1;
  c.omega = omega;
  c.init = init;
  c.parametrization = Parametrization::kNtk;
  return c;
}

const std::vector<double> kZero{0.0};

}  // namespace

TEST(Empirical, ShallowSsnNtkAtOrigin) {
  const auto e = empirical_ntk(ntk_config(1, 10.0), {8192, 16, 100}, kZero, kZero);
  EXPECT_NEAR(e.mean, 51.5, 0.05 * 51.5);
}

TEST(Empirical, ShallowSsnNngpAtOrigin) {
  const auto e = empirical_nngp(ntk_config(1, 1.0), {8192, 16, 200}, kZero, kZero);
  EXPECT_NEAR(e.mean, 1.43233, 0.05 * 1.43233);
}

TEST(Empirical, FarPointsNngpApproachesBias) {
  const std::vector<double> x{0.5}, y{-0.5};
  const auto e = empirical_nngp(ntk_config(1, 10.0), {8192, 16, 300}, x, y);
  EXPECT_LE(std::abs(e.mean - 1.0), 3.0 * e.standard_error + 1e-12);
}

TEST(Empirical, DeterministicAndSymmetric) {
  const std::vector<double> x{0.3}, y{-0.2};
  const EstimatorConfig est{256, 4, 9};
  const auto cfg = ntk_config(2, 3.0);
  const auto a = empirical_ntk(cfg, est, x, y);
  const auto b = empirical_ntk(cfg, est, x, y);
  const auto c = empirical_ntk(cfg, est, y, x);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_EQ(a.mean, c.mean);
  const auto n1 = empirical_nngp(cfg, est, x, y);
  const auto n2 = empirical_nngp(cfg, est, y, x);
  EXPECT_EQ(n1.mean, n2.mean);
}

TEST(Empirical, ParallelMatchesSequential) {
  const std::vector<double> x{0.3}, y{-0.2};
  const EstimatorConfig est{128, 6, 1};
  setenv("SINNET_THREADS", "1", 1);
  const auto seq = empirical_ntk(ntk_config(2, 3.0), est, x, y);
  setenv("SINNET_THREADS", "4", 1);
  const auto par = empirical_ntk(ntk_config(2, 3.0), est, x, y);
  unsetenv("SINNET_THREADS");
  EXPECT_EQ(seq.mean, par.mean);
  EXPECT_EQ(seq.standard_error, par.standard_error);
}

TEST(Empirical, RejectsInvalidConfigurations) {
  auto practical = ntk_config(1, 1.0);
  practical.parametrization = Parametrization::kPractical;
  EXPECT_THROW(empirical_ntk(practical, {16, 2, 0}, kZero, kZero), UsageError);
  auto vector_out = ntk_config(1, 1.0);
  vector_out.output_dim = 2;
  EXPECT_THROW(empirical_ntk(vector_out, {16, 2, 0}, kZero, kZero), UsageError);
  EXPECT_THROW(empirical_ntk(ntk_config(1, 1.0), {0, 2, 0}, kZero, kZero), UsageError);
  EXPECT_THROW(empirical_ntk(ntk_config(1, 1.0), {16, 0, 0}, kZero, kZero), UsageError);
}

TEST(Empirical, WiderIsCloser) {
  const std::vector<double> x{0.2}, y{-0.1};
  const auto cfg = ntk_config(1, 3.0);
  KernelSpec spec;
  spec.omega = 3.0;
  const double truth = ntk(spec, x, y);
  const auto narrow = empirical_ntk(cfg, {64, 32, 1000}, x, y);
  const auto wide = empirical_ntk(cfg, {8192, 32, 1000}, x, y);
  EXPECT_LT(std::abs(wide.mean - truth), std::abs(narrow.mean - truth));
}

TEST(Empirical, SirenShallowMatchesClosedForm) {
  const std::vector<double> x{0.05}, y{0.0};
  KernelSpec spec;
  spec.family = KernelFamily::kSiren;
  spec.omega = 10.0;
  const auto e = empirical_ntk(ntk_config(1, 10.0, InitScheme::kSirenUniform), {8192, 16, 5}, x, y);
  const double truth = ntk(spec, x, y);
  EXPECT_NEAR(e.mean, truth, 0.07 * std::abs(truth));
}

TEST(Empirical, DeepSsnMatchesRecursion) {
  const std::vector<double> x{0.05}, y{0.0};
  KernelSpec spec;
  spec.depth = 3;
  spec.omega = 4.0;
  const auto e = empirical_ntk(ntk_config(3, 4.0), {2048, 8, 11}, x, y);
  EXPECT_NEAR(e.mean, ntk(spec, x, y), 0.1 * ntk(spec, x, y));
}

TEST(Empirical, VarianceScalesWithDraws) {
  const std::vector<double> x{0.2}, y{0.0};
  const auto cfg = ntk_config(1, 3.0);
  // Standard error of the mean over 8 vs 32 draws: ratio about 2.
  std::vector<double> se8, se32;
  for (std::uint64_t rep = 0; rep < 6; ++rep) {
    se8.push_back(empirical_ntk(cfg, {128, 8, rep * 1000}, x, y).standard_error);
    se32.push_back(empirical_ntk(cfg, {128, 32, rep * 1000 + 500}, x, y).standard_error);
  }
  const double ratio = median(se8) / median(se32);
  EXPECT_GT(ratio, 1.0);
  EXPECT_LT(ratio, 4.0);
}
