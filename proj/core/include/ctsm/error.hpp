#pragma once

#include <stdexcept>
#include <string>

namespace ctsm {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents do not conform for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A tridiagonal (or other) system hit a zero pivot.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Adaptive solver exhausted its step budget.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

// A state, loss or gradient became NaN/Inf.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Invalid input data: malformed CSV rows, all-missing channels, bad times.
class DataError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model/pipeline/solver configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for the given inputs (no positives, zero weight).
class MetricError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. asking for gradients that were never recorded.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctsm
