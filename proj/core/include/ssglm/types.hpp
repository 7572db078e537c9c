#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ssglm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Zero-based predictor column indices, sorted ascending and unique.
///
/// Coefficient vectors are laid out with the intercept at position 0 and
/// column c at position c + 1, so a coefficient position coincides with the
/// usual one-based predictor numbering.
using IndexSet = std::vector<Index>;

/// B x (p + 1) mask of which split estimates are usable per coefficient.
using ValidityMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace ssglm
