#include <cmath>
#include <string>

#include "sinnet/error.hpp"
#include "sinnet/signal.hpp"

namespace sinnet {

Signal::Signal(std::vector<std::size_t> axis_sizes, std::vector<double> values)
    : axis_sizes_(std::move(axis_sizes)), values_(std::move(values)) {
  if (axis_sizes_.empty()) throw UsageError("signal needs at least one axis");
  std::size_t total = 1;
  for (std::size_t n : axis_sizes_) {
    if (n == 0) throw UsageError("signal axis sizes must be positive");
    total *= n;
  }
  if (total != values_.size()) {
    throw UsageError("signal has " + std::to_string(values_.size()) + " values but its shape holds " +
                     std::to_string(total));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw UsageError("signal values must be finite");
  }
}

std::vector<std::size_t> Signal::unravel(std::size_t flat) const {
  std::vector<std::size_t> idx(axis_sizes_.size());
  for (std::size_t a = axis_sizes_.size(); a-- > 0;) {
    idx[a] = flat % axis_sizes_[a];
    flat /= axis_sizes_[a];
  }
  return idx;
}

std::size_t Signal::ravel(std::span<const std::size_t> index) const {
  if (index.size() != axis_sizes_.size()) throw UsageError("index rank does not match signal");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axis_sizes_.size(); ++a) {
    if (index[a] >= axis_sizes_[a]) throw UsageError("index out of range");
    flat = flat * axis_sizes_[a] + index[a];
  }
  return flat;
}

Matrix Signal::coordinates() const {
  const auto d = static_cast<Eigen::Index>(ndim());
  Matrix out(d, static_cast<Eigen::Index>(size()));
  std::vector<std::size_t> idx(ndim(), 0);
  for (std::size_t flat = 0; flat < size(); ++flat) {
    for (std::size_t a = 0; a < ndim(); ++a) {
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(flat)) = coordinate(idx[a], axis_sizes_[a]);
    }
    for (std::size_t a = ndim(); a-- > 0;) {
      if (++idx[a] < axis_sizes_[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

CheckerboardSplit checkerboard_split(const Signal& signal) {
  CheckerboardSplit split;
  split.mask.axis_sizes = signal.axis_sizes();
  split.mask.train.resize(signal.size());
  std::size_t n_train = 0;
  std::vector<std::size_t> idx(signal.ndim(), 0);
  for (std::size_t flat = 0; flat < signal.size(); ++flat) {
    std::size_t sum = 0;
    for (std::size_t i : idx) sum += i;
    const bool train = sum % 2 == 0;
    split.mask.train[flat] = train;
    n_train += train ? 1 : 0;
    for (std::size_t a = signal.ndim(); a-- > 0;) {
      if (++idx[a] < signal.axis_sizes()[a]) break;
      idx[a] = 0;
    }
  }
  const Matrix coords = signal.coordinates();
  const auto d = coords.rows();
  const auto n_test = signal.size() - n_train;
  split.train.points.resize(d, static_cast<Eigen::Index>(n_train));
  split.train.values.resize(static_cast<Eigen::Index>(n_train));
  split.test.points.resize(d, static_cast<Eigen::Index>(n_test));
  split.test.values.resize(static_cast<Eigen::Index>(n_test));
  Eigen::Index tr = 0;
  Eigen::Index te = 0;
  for (std::size_t flat = 0; flat < signal.size(); ++flat) {
    const auto col = static_cast<Eigen::Index>(flat);
    if (split.mask.train[flat]) {
      split.train.points.col(tr) = coords.col(col);
      split.train.values(tr++) = signal[flat];
    } else {
      split.test.points.col(te) = coords.col(col);
      split.test.values(te++) = signal[flat];
    }
  }
  return split;
}

}  // namespace sinnet
