#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evolmath {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class GenerationFailure : public Error {
 public:
  GenerationFailure(const std::string& what, std::size_t attempts)
      : Error(what), attempts_(attempts) {}
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

/// Raised by an operator whose preconditions do not hold for a given problem.
/// The pipeline catches it, logs the reason and keeps the input unchanged.
class OperatorSkip : public Error {
 public:
  using Error::Error;
};

class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace evolmath
