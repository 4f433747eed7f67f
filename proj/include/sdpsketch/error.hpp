#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdpsketch {

enum class ErrorCode {
  NonFinite,
  ConvergenceFailure,
  DimensionMismatch,
  InvalidConfig,
  InvalidShape,
  InvalidArgument,
  NotPacking,
  NotStrictlyFeasible,
  DegenerateCertificate,
  NumericalFailure,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPacking: return "NotPacking";
    case ErrorCode::NotStrictlyFeasible: return "NotStrictlyFeasible";
    case ErrorCode::DegenerateCertificate: return "DegenerateCertificate";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class SketchError : public std::runtime_error {
 public:
  SketchError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw SketchError(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace sdpsketch
