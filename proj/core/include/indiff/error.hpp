#pragma once

#include <stdexcept>
#include <string>

namespace indiff {

enum class ErrorCode {
  NotSquare,
  NegativeOffDiagonal,
  RowSumNonzero,
  InvalidParameter,
  StepTooCoarse,
  BracketFailure,
  StepRejected,
  PositivityLost,
  GridTooCoarse,
  DomainError,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine carries one of the codes above so
/// front ends can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace indiff
