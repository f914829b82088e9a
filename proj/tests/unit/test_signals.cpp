#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sinnet/error.hpp"
#include "sinnet/signal.hpp"

using namespace sinnet;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

FormatErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no FormatError thrown";
  return FormatErrorKind::kUnsupportedLayout;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sinnet_test_" + name);
}

}  // namespace

TEST(Signal, ValidatesShape) {
  EXPECT_THROW(Signal({2, 2}, {1, 2, 3}), UsageError);
  EXPECT_THROW(Signal({0}, {}), UsageError);
  EXPECT_THROW(Signal({1}, {NAN}), UsageError);
  const Signal s({2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(s.unravel(4), (std::vector<std::size_t>{1, 1}));
  const std::vector<std::size_t> idx{1, 2};
  EXPECT_EQ(s.ravel(idx), 5u);
}

TEST(Signal, CellCenteredCoordinates) {
  EXPECT_DOUBLE_EQ(Signal::coordinate(0, 4), -0.75);
  EXPECT_DOUBLE_EQ(Signal::coordinate(3, 4), 0.75);
  const Signal s({2, 2}, {0, 0, 0, 0});
  const Matrix c = s.coordinates();
  EXPECT_DOUBLE_EQ(c(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(c(1, 1), 0.5);
}

TEST(Pgm, ParsesP5Example) {
  auto b = bytes_of("P5 2 2 255\n");
  b.insert(b.end(), {0, 255, 128, 64});
  const Signal s = parse_pgm(b);
  EXPECT_EQ(s.axis_sizes(), (std::vector<std::size_t>{2, 2}));
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 1.0);
  EXPECT_NEAR(s[2], 0.50196, 1e-5);
  EXPECT_NEAR(s[3], 0.25098, 1e-5);
}

TEST(Pgm, AcceptsComments) {
  auto b = bytes_of("P5\n# made by hand\n1 1\n255\n");
  b.push_back(51);
  EXPECT_DOUBLE_EQ(parse_pgm(b)[0], 0.2);
}

TEST(Pgm, DistinctErrors) {
  EXPECT_EQ(kind_of([] { parse_pgm(bytes_of("P5 2 x 255\n")); }), FormatErrorKind::kMalformedHeader);
  EXPECT_EQ(kind_of([] { parse_pgm(bytes_of("Q5 2 2 255\n")); }), FormatErrorKind::kMalformedHeader);
  EXPECT_EQ(kind_of([] { parse_pgm(bytes_of("P5 2 2 255\nabc")); }), FormatErrorKind::kTruncatedPayload);
  EXPECT_EQ(kind_of([] { parse_pgm(bytes_of("P5 2 2 65535\n")); }), FormatErrorKind::kUnsupportedBitDepth);
  EXPECT_EQ(kind_of([] { parse_pgm(bytes_of("P2 2 2 255\n")); }), FormatErrorKind::kUnsupportedLayout);
}

TEST(Pgm, WriteLoadRoundTrip) {
  std::vector<double> v(7 * 5);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::fmod(0.137 * static_cast<double>(i), 1.0);
  const Signal s({7, 5}, v);
  const auto path = temp_path("roundtrip.pgm");
  write_pgm(s, path);
  const Signal back = load_signal(path, SignalFormat::kPgm);
  ASSERT_EQ(back.axis_sizes(), s.axis_sizes());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LE(std::abs(back[i] - v[i]), 1.0 / 510.0 + 1e-12);
  std::filesystem::remove(path);
}

TEST(Pgm, HalfQuantizesTo128) {
  const Signal s({2, 2}, {0.5, 0.5, 0.5, 0.5});
  const auto b = encode_pgm(s);
  for (std::size_t i = b.size() - 4; i < b.size(); ++i) EXPECT_EQ(b[i], 128);
}

TEST(Pgm, ClampsOutOfRange) {
  const Signal s({1, 2}, {-3.0, 7.0});
  const auto b = encode_pgm(s);
  EXPECT_EQ(b[b.size() - 2], 0);
  EXPECT_EQ(b[b.size() - 1], 255);
  EXPECT_THROW(encode_pgm(Signal({2}, {0, 0})), UsageError);
}

TEST(Wav, ScalesPcm16) {
  const std::vector<std::int16_t> samples{16384, -32768, 0};
  const Signal s = parse_wav(encode_wav(samples, 8000));
  EXPECT_EQ(s.axis_sizes(), std::vector<std::size_t>{3});
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  EXPECT_DOUBLE_EQ(s[1], -1.0);
  EXPECT_DOUBLE_EQ(s[2], 0.0);
}

TEST(Wav, DistinctErrors) {
  const std::vector<std::int16_t> samples{1, 2, 3, 4};
  auto good = encode_wav(samples, 8000);
  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  EXPECT_EQ(kind_of([&] { parse_wav(truncated); }), FormatErrorKind::kTruncatedPayload);
  auto eight_bit = good;
  eight_bit[34] = 8;  // bits per sample
  EXPECT_EQ(kind_of([&] { parse_wav(eight_bit); }), FormatErrorKind::kUnsupportedBitDepth);
  auto stereo = good;
  stereo[22] = 2;
  EXPECT_EQ(kind_of([&] { parse_wav(stereo); }), FormatErrorKind::kUnsupportedLayout);
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { parse_wav(bad_magic); }), FormatErrorKind::kMalformedHeader);
}

TEST(CsvGrid, ParsesExample) {
  const Signal s = parse_csv_grid("shape:3\n1\n2\n3\n");
  EXPECT_EQ(s.axis_sizes(), std::vector<std::size_t>{3});
  EXPECT_EQ(std::vector<double>(s.values().begin(), s.values().end()), (std::vector<double>{1, 2, 3}));
}

TEST(CsvGrid, DistinctErrors) {
  EXPECT_EQ(kind_of([] { parse_csv_grid("dims:3\n1\n2\n3\n"); }), FormatErrorKind::kMalformedHeader);
  EXPECT_EQ(kind_of([] { parse_csv_grid("shape:2,x\n1\n"); }), FormatErrorKind::kMalformedHeader);
  EXPECT_EQ(kind_of([] { parse_csv_grid("shape:3\n1\n2\n"); }), FormatErrorKind::kTruncatedPayload);
  EXPECT_EQ(kind_of([] { parse_csv_grid("shape:2\n1\nabc\n"); }), FormatErrorKind::kMalformedHeader);
  EXPECT_EQ(kind_of([] { parse_csv_grid("shape:1\n1\n2\n"); }), FormatErrorKind::kMalformedHeader);
}

TEST(CsvGrid, RoundTripIsExact) {
  const Signal s({2, 2}, {0.1, 1.0 / 3.0, -2e-300, 12345.678901234567});
  const auto path = temp_path("grid.csv");
  write_csv_grid(s, path);
  const Signal back = load_signal(path, SignalFormat::kCsvGrid);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back[i], s[i]);
  std::filesystem::remove(path);
}

TEST(Csv, CurveRoundTripAndFormat) {
  const std::vector<std::vector<double>> rows{{16, 1.0 / 3.0}, {64, 0.1}};
  const std::string text = format_csv({"cutoff", "mse"}, rows);
  EXPECT_EQ(text.substr(0, 11), "cutoff,mse\n");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto second = text.substr(11, text.find('\n', 11) - 11);
  EXPECT_EQ(std::stod(second.substr(second.find(',') + 1)), 1.0 / 3.0);
  EXPECT_THROW(format_csv({"a"}, {{1.0, 2.0}}), UsageError);
}

TEST(Load, MissingFileIsDataError) {
  EXPECT_THROW(load_signal("/nonexistent/file.pgm", SignalFormat::kPgm), DataError);
}

TEST(Synth, TwoFrequencyProperties) {
  const Signal s = synth_two_frequency(512);
  double sum = 0.0, sq = 0.0;
  for (double v : s.values()) {
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / s.size(), 0.0, 1e-9);
  EXPECT_NEAR(sq / s.size(), 1.0, 1e-6);
  // The analytic function at the origin.
  EXPECT_DOUBLE_EQ(std::cos(128 * std::numbers::pi * 0.0) + std::cos(32 * std::numbers::pi * 0.0), 2.0);
  // Axis 0 carries the 128 component: neighbours along axis 1 differ little.
  EXPECT_NEAR(s[0] - s[1], std::cos(32 * std::numbers::pi * Signal::coordinate(0, 512)) -
                               std::cos(32 * std::numbers::pi * Signal::coordinate(1, 512)), 1e-12);
  EXPECT_THROW(synth_two_frequency(256), UsageError);
}

TEST(Synth, BandlimitedIsDeterministicAndUnitRms) {
  const Signal a = synth_bandlimited(64, 16, 5, 1);
  const Signal b = synth_bandlimited(64, 16, 5, 1);
  EXPECT_EQ(std::vector<double>(a.values().begin(), a.values().end()),
            std::vector<double>(b.values().begin(), b.values().end()));
  double sq = 0.0;
  for (double v : a.values()) sq += v * v;
  EXPECT_NEAR(sq / a.size(), 1.0, 1e-12);
  EXPECT_THROW(synth_bandlimited(64, 32, 5, 1), UsageError);
}

TEST(Synth, SmoothImageDerivativesMatchFiniteDifferences) {
  std::vector<Signal> g;
  Signal lap;
  const std::size_t n = 128;
  const Signal s = synth_smooth_image(n, 3, &g, &lap);
  const double h = 2.0 / n;
  const std::size_t i = 60, j = 70;
  auto at = [&](std::size_t a, std::size_t b) { return s[a * n + b]; };
  EXPECT_NEAR(g[0][i * n + j], (at(i + 1, j) - at(i - 1, j)) / (2 * h), 5e-3);
  EXPECT_NEAR(g[1][i * n + j], (at(i, j + 1) - at(i, j - 1)) / (2 * h), 5e-3);
  const double fd_lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * at(i, j)) / (h * h);
  EXPECT_NEAR(lap[i * n + j], fd_lap, 0.05);
  const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
  EXPECT_DOUBLE_EQ(*lo, 0.0);
  EXPECT_DOUBLE_EQ(*hi, 1.0);
}

TEST(Checkerboard, Counts) {
  const auto a = checkerboard_split(Signal({4, 4}, std::vector<double>(16, 0.0)));
  EXPECT_EQ(a.train.values.size(), 8);
  EXPECT_EQ(a.test.values.size(), 8);
  const auto b = checkerboard_split(Signal({3, 3}, std::vector<double>(9, 0.0)));
  EXPECT_EQ(b.train.values.size(), 5);
  EXPECT_EQ(b.test.values.size(), 4);
  const auto c = checkerboard_split(Signal({6}, {0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(c.train.values, (Vector(3) << 0, 2, 4).finished());
  EXPECT_EQ(c.mask.train, (std::vector<bool>{true, false, true, false, true, false}));
}

TEST(Checkerboard, PartitionIsComplete) {
  const std::size_t r = 5, c = 7;
  std::vector<double> v(r * c);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const auto split = checkerboard_split(Signal({r, c}, v));
  std::vector<int> seen(v.size(), 0);
  for (Eigen::Index k = 0; k < split.train.values.size(); ++k) seen[static_cast<std::size_t>(split.train.values(k))]++;
  for (Eigen::Index k = 0; k < split.test.values.size(); ++k) seen[static_cast<std::size_t>(split.test.values(k))]++;
  for (int s : seen) EXPECT_EQ(s, 1);
  const auto diff = split.train.values.size() - split.test.values.size();
  EXPECT_TRUE(diff == 0 || diff == 1);
}
