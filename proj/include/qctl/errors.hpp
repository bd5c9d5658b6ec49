#pragma once

#include <stdexcept>
#include <string>

namespace qctl {

/// Operands live on different grids or have inconsistent lengths.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve broke down (zero pivot) or a residual check failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values appeared during propagation or cost evaluation.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Armijo backtracking exhausted without producing descent.
class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arc classification could not resolve any interval.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a) +
                         " != " + std::to_string(b));
  }
}

}  // namespace qctl
