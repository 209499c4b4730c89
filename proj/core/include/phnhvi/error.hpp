#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phnhvi {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (vector lengths, layer widths, objective counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or degenerate numeric input.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}

  /// Offending element index, or -1 when not applicable.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// A precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A backward pass was requested with a tape that no longer matches the parameters.
class StaleTapeError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an artifact failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace phnhvi
