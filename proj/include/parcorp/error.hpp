#pragma once

#include <stdexcept>
#include <string>

namespace parcorp {

// Broad failure class; drives HTTP status codes and CLI exit codes.
enum class ErrorKind {
  InvalidArgument,  // malformed input to a pure function
  Precondition,     // engine precondition violated (HTTP 422)
  NotFound,
  Conflict,         // duplicate handle etc. (HTTP 409)
  Unauthorized,
  Unavailable,      // translator unavailable (HTTP 503)
  Data,             // bad input files (CLI exit 3)
  Store,            // persistence failure (CLI exit 4)
};

// Error with a stable, machine-readable reason code such as
// "rating_out_of_range".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string reason, const std::string& message)
      : std::runtime_error(message), kind_(kind), reason_(std::move(reason)) {}
  Error(ErrorKind kind, std::string reason)
      : std::runtime_error(reason), kind_(kind), reason_(std::move(reason)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  ErrorKind kind_;
  std::string reason_;
};

}  // namespace parcorp
