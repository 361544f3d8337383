#pragma once

#include <stdexcept>
#include <string>

namespace pmace {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape or index mismatch between arrays, patches, or stacks.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration value (out-of-range parameter, unknown kind, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Consensus operator construction failed (uncovered or zero-weight pixels).
class CoverageError : public Error {
public:
  using Error::Error;
};

/// Iterative solver produced non-finite values.
class DivergenceError : public Error {
public:
  explicit DivergenceError(const std::string& msg, int iteration)
      : Error(msg), iteration(iteration) {}
  int iteration;
};

/// File format or I/O failure.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace pmace
