#include "ssglm/error.hpp"

namespace ssglm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite_value: return "non_finite_value";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::non_finite_cumulant: return "non_finite_cumulant";
    case ErrorCode::fit_failed: return "fit_failed";
    case ErrorCode::selection_failed: return "selection_failed";
    case ErrorCode::degenerate_split: return "degenerate_split";
    case ErrorCode::insufficient_splits: return "insufficient_splits";
    case ErrorCode::singular_contrast: return "singular_contrast";
    case ErrorCode::contrast_rank: return "contrast_rank";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::missing_value: return "missing_value";
    case ErrorCode::duplicate_column: return "duplicate_column";
    case ErrorCode::missing_column: return "missing_column";
    case ErrorCode::non_binary_modifier: return "non_binary_modifier";
    case ErrorCode::invalid_response: return "invalid_response";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::scenario_error: return "scenario_error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace ssglm
