#pragma once

#include <stdexcept>
#include <string>

namespace sinnet {

// Bad arguments or configuration supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be ingested (malformed files, empty sets, I/O).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite intermediates, fit or quadrature non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sinnet
