#pragma once

#include <stdexcept>
#include <string>

namespace qpkdv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched lattice dimensions between two objects.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the domain of a weight or formula (k = 0, alpha.k = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A NaN or overflow appeared during time stepping or quadrature.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpkdv
