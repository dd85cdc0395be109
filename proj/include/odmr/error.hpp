#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace odmr {

enum class ErrorCode {
  InvalidArgument,
  Domain,
  Numerical,
  DegenerateSteadyState,
  PeakDetection,
  FitFailure,
  ModelMismatch,
  NoSensitivity,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library error carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace odmr
