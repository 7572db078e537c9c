#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssglm/split_smooth.hpp"
#include "ssglm/types.hpp"

namespace ssglm {

struct VarianceEstimate {
  Vector v_hat;    ///< infinitesimal-jackknife variance per coefficient
  Vector v_hat_B;  ///< bias-corrected variance, floored when not positive
  std::vector<bool> clamped;
  /// n x (p + 1) covariance components, filled when requested.
  std::optional<Matrix> cov;
};

/// n(n - 1) / (n - n1)^2, the finite-sample factor in front of the jackknife sum.
double jackknife_factor(Index n, Index n1);

/// Jackknife variance of each column of `estimates` (B x m) around `center`.
/// Rows flagged false in `valid` are dropped column by column, so each
/// coefficient uses only the splits in which it was estimated.
/// Columns with fewer than 2 usable splits get NaN. Throws
/// Error(insufficient_splits) when the plan has fewer than 2 splits.
Vector jackknife_variance(const SplitPlan& plan, const Eigen::Ref<const Matrix>& estimates,
                          const Eigen::Ref<const Vector>& center,
                          const ValidityMask* valid = nullptr, Matrix* cov_out = nullptr);

/// v_hat - (n / B^2) (n1 / (n - n1)) sum_b (estimate - center)^2 per column.
/// Values that are not positive are floored at 1e-12 * v_hat and flagged.
Vector bias_corrected_variance(const SplitPlan& plan, const Eigen::Ref<const Vector>& v_hat,
                               const Eigen::Ref<const Matrix>& estimates,
                               const Eigen::Ref<const Vector>& center,
                               std::vector<bool>& clamped, const ValidityMask* valid = nullptr);

VarianceEstimate estimate_variance(const SmoothedFit& fit, bool keep_cov = false);

/// Per-coefficient inference table. Position 0 is the intercept.
struct InferenceReport {
  double alpha = 0.05;
  Vector beta_hat;
  Vector se;  ///< sqrt of the bias-corrected variance
  Vector z;   ///< beta_hat / se
  Vector ci_lower;
  Vector ci_upper;
  Vector p_values;
  Vector bonferroni;      ///< min(1, p * p_value), p = number of predictors
  Vector selection_freq;  ///< NaN for the intercept
  std::vector<bool> clamped;
  std::vector<Index> effective_splits;
  std::vector<std::string> warnings;
};

/// Normal-theory intervals and two-sided p-values from beta_hat and its variance.
/// A zero variance with a nonzero estimate gives p = 0 and a warning.
InferenceReport coordinate_inference(const Eigen::Ref<const Vector>& beta_hat,
                                     const Eigen::Ref<const Vector>& variance, double alpha);

/// Variance estimation plus coordinate_inference for a smoothed fit.
InferenceReport infer(const SmoothedFit& fit, double alpha = 0.05);
InferenceReport infer(const SmoothedFit& fit, const VarianceEstimate& variance, double alpha);

// ---------------------------------------------------------------------------
// Joint inference for a fixed subvector

struct SubvectorFit {
  IndexSet subset;   ///< S1 as 0-based column indices, in the caller's order
  Vector beta1_hat;  ///< length |S1|
  Matrix estimates;  ///< B x |S1| per-split estimates
  std::vector<bool> valid_splits;
  SplitPlan plan;
  Index effective_splits = 0;
  std::vector<std::string> warnings;
};

/// Per split, fits the estimation half on S1 together with the split's
/// selected set and keeps the S1 coefficients. Splits whose joint fit fails
/// are excluded from the average and the covariance.
SubvectorFit subvector_fit(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                           const Family& family, const Selector& selector, const IndexSet& S1,
                           const SsglmOptions& options);
SubvectorFit subvector_fit(const Dataset& data, const Family& family, const Selector& selector,
                           const IndexSet& S1, const SsglmOptions& options);

/// factor * sum_i cov_i cov_i^T with cov_i = (1/B) sum_b (J_bi - mean_b J_bi)(est_b - center).
Matrix subvector_covariance(const SplitPlan& plan, const Eigen::Ref<const Matrix>& estimates,
                            const Eigen::Ref<const Vector>& center,
                            const std::vector<bool>* valid_splits = nullptr);
Matrix subvector_covariance(const SubvectorFit& fit);

struct ContrastTest {
  IndexSet subset;
  Vector beta1_hat;
  Matrix sigma1_hat;
  Matrix Q;
  Vector R;
  double T = 0;
  Index df = 0;
  double p_value = 1;
};

/// Wald test of Q beta1 = R against chi-square with rows(Q) degrees of freedom.
/// Throws Error(contrast_rank) if Q is not of full row rank and
/// Error(singular_contrast) if Q Sigma Q^T is singular.
ContrastTest contrast_test(const Eigen::Ref<const Vector>& beta1_hat,
                           const Eigen::Ref<const Matrix>& sigma1_hat,
                           const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Vector>& R);

}  // namespace ssglm
