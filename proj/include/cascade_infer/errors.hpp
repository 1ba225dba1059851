#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cascade_infer {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the operation's domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a model invariant (weights, probabilities, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A text input could not be parsed. Carries the 1-based line number (0 when
/// the input is not line oriented).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Data was requested that the current observation setting does not expose.
class AccessError : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a configured resource cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An experiment configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade_infer
