#include "doseopt/error.hpp"

namespace doseopt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kInvalidProbability: return "invalid_probability";
    case ErrorCode::kNonAdditiveUtility: return "non_additive_utility";
    case ErrorCode::kInvalidPmf: return "invalid_pmf";
    case ErrorCode::kUncalibrated: return "uncalibrated_generator";
    case ErrorCode::kCalibrationFailed: return "calibration_failed";
    case ErrorCode::kNotTabulated: return "not_tabulated";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kWrongStatus: return "wrong_status";
    case ErrorCode::kDoseMismatch: return "dose_mismatch";
    case ErrorCode::kCorruptLog: return "corrupt_log";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kUnauthorized: return "unauthorized";
  }
  return "unknown";
}

}  // namespace doseopt
