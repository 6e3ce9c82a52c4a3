#pragma once

#include <stdexcept>
#include <string>

namespace layerfield {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or a violated stack invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Degenerate numerics, e.g. a vanishing Wronskian.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace layerfield
