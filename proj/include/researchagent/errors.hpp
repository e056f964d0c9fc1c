#pragma once

#include <stdexcept>
#include <string>

namespace ra {

enum class ErrorCode {
  Ok = 0,
  InvalidInput,
  NotFound,
  ParseError,
  RenderError,
  ExtractionError,
  TransportError,
  ReplayMiss,
  IoError,
  StageError,
  InductionError,
  Undefined,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::RenderError: return "render-error";
    case ErrorCode::ExtractionError: return "extraction-error";
    case ErrorCode::TransportError: return "transport-error";
    case ErrorCode::ReplayMiss: return "replay-miss";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::StageError: return "stage-error";
    case ErrorCode::InductionError: return "induction-error";
    case ErrorCode::Undefined: return "undefined";
  }
  return "unknown";
}

}  // namespace ra
