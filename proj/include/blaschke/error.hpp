#pragma once

#include <stdexcept>
#include <string>

namespace blaschke {

/// Base class for all library errors. The CLI maps each subclass onto an exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed configuration, out-of-range parameters.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed (non-convergence, singular system, meshing failure).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A computed quantity violates a mathematical invariant it must satisfy.
class InvariantError : public Error {
public:
  using Error::Error;
};

/// A configured resource cap (element count, iteration count) was exceeded.
class ResourceLimitError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace detail
}  // namespace blaschke
