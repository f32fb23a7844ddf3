#pragma once

#include <stdexcept>
#include <string>

namespace ebm2 {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Array length does not match the grid it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quadrature or iterative refinement failed to reach its tolerance.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value in a nonlinear evaluation; usually imminent blow-up.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size fell below its floor before any event was reached.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// Precondition on inputs violated (ordering, containment, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Configuration outside what the theory (or the implementation) covers.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unreadable configuration. `key()` is the offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Newton (or another iteration) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebm2
