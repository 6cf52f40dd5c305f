#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace memsnn {

enum class ErrorCategory {
  InvalidInput,
  ModeViolation,
  CalibrationImpossible,
  Parse,
  DimensionMismatch,
  Undefined,
  ContractViolation,
  Config,
  Io,
};

inline std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidInput: return "invalid-input";
    case ErrorCategory::ModeViolation: return "mode-violation";
    case ErrorCategory::CalibrationImpossible: return "calibration-impossible";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::DimensionMismatch: return "dimension-mismatch";
    case ErrorCategory::Undefined: return "undefined";
    case ErrorCategory::ContractViolation: return "contract-violation";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Absolute slack for comparing simulation instants built from integer step counts.
inline constexpr double kTimeEpsilon = 1e-12;

}  // namespace memsnn
