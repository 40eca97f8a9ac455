#pragma once

#include <stdexcept>
#include <string>

namespace ablab {

/// Precondition or configuration violation. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a run (instability, non-finite values). Maps to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written; the message carries the path. Maps to exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ablab
