#include "indiff/error.hpp"

namespace indiff {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorCode::RowSumNonzero: return "RowSumNonzero";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::StepTooCoarse: return "StepTooCoarse";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace indiff
