#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ubve {

enum class ErrorKind {
  invalid_argument,
  unsupported,
  numeric_failure,
  incompatible_data,
  near_singular,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::numeric_failure: return "numeric-failure";
    case ErrorKind::incompatible_data: return "incompatible-data";
    case ErrorKind::near_singular: return "near-singular";
  }
  return "unknown";
}

/// Base of every exception thrown by the library.
///
/// `detail()` optionally carries a machine-readable JSON object (for example
/// `{"constraint":"eq3","value":12.56}`) that the CLI forwards verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string detail = {})
      : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message, std::string detail = {})
      : Error(ErrorKind::invalid_argument, message, std::move(detail)) {}
};

class Unsupported : public Error {
 public:
  explicit Unsupported(const std::string& message)
      : Error(ErrorKind::unsupported, message) {}
};

class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& message)
      : Error(ErrorKind::numeric_failure, message) {}
};

class IncompatibleData : public Error {
 public:
  IncompatibleData(const std::string& message, std::string detail)
      : Error(ErrorKind::incompatible_data, message, std::move(detail)) {}
};

class NearSingular : public Error {
 public:
  explicit NearSingular(const std::string& message)
      : Error(ErrorKind::near_singular, message) {}
};

}  // namespace ubve
