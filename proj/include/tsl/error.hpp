#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsl {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed config, unparsable expression, violated problem
// invariants, invalid arguments. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : ConfigError(what + " at offset " + std::to_string(offset)), reason_(what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

  /// Same error with a prefix naming where the source text came from.
  ParseError in(const std::string& context) const { return ParseError(context + ": " + reason_, offset_); }

 private:
  std::string reason_;
  std::size_t offset_;
};

// Failures of a computation on valid input. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Expression evaluated outside its domain (log of non-positive, x/0, ...).
class DomainError : public NumericalError {
 public:
  DomainError(const std::string& what, double x)
      : NumericalError(what + " at x = " + std::to_string(x)), x_(x) {}

  double x() const noexcept { return x_; }

 private:
  double x_;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// lambda is an eigenvalue to working accuracy, so (lambda - A) is not invertible.
class ResolventPole : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tsl
