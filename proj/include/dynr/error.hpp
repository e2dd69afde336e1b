#pragma once
#include <stdexcept>
#include <string>

namespace dynr {

enum class ErrorCode {
  NotAUnit,
  NotASquare,
  WindowTooSmall,
  PunctureMismatch,
  NotSquarefree,
  BadDegree,
  LeadingNotSquare,
  GenusTooSmall,
  BothForms,
  NotTransversal,
  DualityFailure,
  SearchExhausted,
  SingularSystem,
  PoleBoundTooSmall,
  DepthExceeded,
  NotInnerOuter,
  JetOrderTooLow,
  SchemaMismatch,
  ParseError,
  ConfigError,
  Internal,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotAUnit: return "NotAUnit";
    case ErrorCode::NotASquare: return "NotASquare";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::PunctureMismatch: return "PunctureMismatch";
    case ErrorCode::NotSquarefree: return "NotSquarefree";
    case ErrorCode::BadDegree: return "BadDegree";
    case ErrorCode::LeadingNotSquare: return "LeadingNotSquare";
    case ErrorCode::GenusTooSmall: return "GenusTooSmall";
    case ErrorCode::BothForms: return "BothForms";
    case ErrorCode::NotTransversal: return "NotTransversal";
    case ErrorCode::DualityFailure: return "DualityFailure";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PoleBoundTooSmall: return "PoleBoundTooSmall";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::NotInnerOuter: return "NotInnerOuter";
    case ErrorCode::JetOrderTooLow: return "JetOrderTooLow";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

/// Single exception type; the code tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dynr
