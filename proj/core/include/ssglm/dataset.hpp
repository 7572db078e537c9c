#pragma once

#include <string>
#include <vector>

#include "ssglm/family.hpp"
#include "ssglm/types.hpp"

namespace ssglm {

/// Response plus n x p design with column labels and centering metadata.
struct Dataset {
  Vector y;
  Matrix X;
  std::vector<std::string> labels;
  std::string response_label = "y";
  std::vector<bool> centered;  ///< per column
  Vector column_means;         ///< value subtracted from each centered column (0 otherwise)

  Index rows() const noexcept { return X.rows(); }
  Index cols() const noexcept { return X.cols(); }

  /// Wraps raw arrays; labels default to x1..xp. Centers every column if asked.
  static Dataset from_matrix(Vector y, Matrix X, std::vector<std::string> labels = {},
                             bool center = true);

  /// Subtracts column means from every column not yet centered.
  void center_columns();
  /// Design with centering undone.
  Matrix uncentered() const;
  /// Index of the column with this label; throws Error(missing_column).
  Index column_index(const std::string& label) const;
};

/// Throws Error(invalid_response) unless every y is legal for the family and
/// Error(non_finite_value) if the design has non-finite entries.
void validate_dataset(const Dataset& data, const Family& family);

struct LoadOptions {
  char delimiter = ',';
  bool center = true;
};

/// Reads a delimited text file with a header row. Every non-response column
/// becomes a predictor. Blank or non-numeric cells are rejected with the
/// offending row and column named in the message.
Dataset load_dataset(const std::string& path, const std::string& response_column,
                     const LoadOptions& options = {});

/// Writes y and the uncentered design at full precision; inverse of load_dataset.
void write_dataset(const std::string& path, const Dataset& data, char delimiter = ',');

/// Appends modifier x target product columns labelled prefix + target label.
/// Products use uncentered values; new columns are centered afterwards when the
/// dataset is centered. The modifier must be 0/1 before centering.
Dataset expand_interactions(const Dataset& data, const std::string& modifier_column,
                            const std::vector<std::string>& target_columns,
                            const std::string& prefix);

}  // namespace ssglm
