#include "decoh/error.hpp"

namespace decoh {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DeltaUnsupported: return "DeltaUnsupported";
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::QuadratureTail: return "QuadratureTail";
    case ErrorCode::PositionNotInSupport: return "PositionNotInSupport";
    case ErrorCode::NonFiniteVariance: return "NonFiniteVariance";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ZeroSeparation: return "ZeroSeparation";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::CourantViolation: return "CourantViolation";
    case ErrorCode::NormDrift: return "NormDrift";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace decoh
