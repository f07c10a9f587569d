#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace decoh {

enum class ErrorCode {
  InvalidArgument,
  DeltaUnsupported,
  GridTooNarrow,
  QuadratureTail,
  PositionNotInSupport,
  NonFiniteVariance,
  ZeroVariance,
  ZeroSeparation,
  InsufficientSamples,
  CourantViolation,
  NormDrift,
  Unsupported,
};

std::string_view to_string(ErrorCode code);

/// Engine failure carrying a machine-readable code; what() is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace decoh
