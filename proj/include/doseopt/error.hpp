#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace doseopt {

// Every failure the engine can raise carries exactly one of these codes.
enum class ErrorCode {
  kValidation,
  kInvalidProbability,
  kNonAdditiveUtility,
  kInvalidPmf,
  kUncalibrated,
  kCalibrationFailed,
  kNotTabulated,
  kInfeasible,
  kNotFound,
  kConflict,
  kWrongStatus,
  kDoseMismatch,
  kCorruptLog,
  kIo,
  kUnauthorized,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {})
      : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  // Dotted path of the offending input field, empty when not applicable.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

inline void require(bool ok, ErrorCode code, const std::string& message,
                    const std::string& field = {}) {
  if (!ok) throw Error(code, message, field);
}

}  // namespace doseopt
