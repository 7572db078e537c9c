#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssglm {

/// Diagnostic codes. The numeric value doubles as the CLI exit status, so
/// every value must stay distinct and nonzero.
enum class ErrorCode : int {
  invalid_argument = 10,
  dimension_mismatch = 11,
  non_finite_value = 12,
  rank_deficient = 20,
  non_finite_cumulant = 21,
  fit_failed = 22,
  selection_failed = 30,
  degenerate_split = 40,
  insufficient_splits = 41,
  singular_contrast = 50,
  contrast_rank = 51,
  parse_error = 60,
  missing_value = 61,
  duplicate_column = 62,
  missing_column = 63,
  non_binary_modifier = 64,
  invalid_response = 65,
  io_error = 66,
  config_error = 70,
  scenario_error = 71,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ssglm
