#include "odmr/error.hpp"

namespace odmr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::DegenerateSteadyState: return "degenerate_steady_state";
    case ErrorCode::PeakDetection: return "peak_detection";
    case ErrorCode::FitFailure: return "fit_failure";
    case ErrorCode::ModelMismatch: return "model_mismatch";
    case ErrorCode::NoSensitivity: return "no_sensitivity";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace odmr
