#pragma once

#include <Eigen/Cholesky>

#include "ssglm/family.hpp"
#include "ssglm/types.hpp"

namespace ssglm {

struct FitOptions {
  int max_iter = 100;
  double score_tol = 1e-8;
  /// Refit with a small ridge penalty when the unpenalized iterates diverge.
  bool ridge_fallback = true;
  int max_halvings = 20;
  /// Any |coefficient| beyond this is treated as divergence (quasi-separation).
  double divergence_bound = 30.0;
  double ridge_penalty = 1e-6;
};

/// Result of a low-dimensional ("partial") regression of y on an intercept
/// plus the columns of a sub-design.
struct PartialFit {
  IndexSet subset;        ///< columns of the parent design, if known
  Vector beta;            ///< intercept first, length 1 + |subset|
  double neg_loglik = 0;  ///< unpenalized (1/n) sum {A(theta_i) - y_i theta_i}
  Matrix info;            ///< observed information at beta, unpenalized
  bool converged = false;
  int iterations = 0;
  bool stabilized = false;  ///< ridge fallback was used
  bool saturated = false;   ///< a Poisson natural parameter hit the overflow clamp
  double score_norm = 0;    ///< sup-norm of the (penalized) score at beta
};

struct ScoreInformation {
  Vector score;
  Matrix information;
};

/// (1/n) sum_i {A(xbar_i beta) - y_i xbar_i beta}; `design` excludes the intercept column.
double neg_log_likelihood(const Eigen::Ref<const Vector>& beta, const Eigen::Ref<const Vector>& y,
                          const Eigen::Ref<const Matrix>& design, const Family& family);

/// U = n^{-1} Xbar^T (A'(Xbar beta) - y), I = n^{-1} Xbar^T diag(A''(Xbar beta)) Xbar.
ScoreInformation score_and_information(const Eigen::Ref<const Vector>& beta,
                                       const Eigen::Ref<const Vector>& y,
                                       const Eigen::Ref<const Matrix>& design,
                                       const Family& family);

/// Maximum-likelihood fit of y on [1, design].
///
/// Gaussian responses are solved in closed form (least squares through a
/// pivoted QR). Other families use damped Newton (IRLS) started at
/// intercept = g(mean y), slopes = 0, halving the step whenever the objective
/// would increase. Throws Error(rank_deficient) if [1, design] lacks full
/// column rank and Error(invalid_argument) unless 1 + cols < rows.
PartialFit fit_mle(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& design,
                   const Family& family, const FitOptions& options = {});

/// fit_mle on the listed columns of X, recording the subset.
PartialFit fit_subset(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                      const IndexSet& subset, const Family& family,
                      const FitOptions& options = {});

Matrix select_columns(const Eigen::Ref<const Matrix>& X, const IndexSet& subset);
/// Rows (entries) of X (y) at the listed positions, in order.
Matrix take_rows(const Eigen::Ref<const Matrix>& X, const IndexSet& rows);
Vector take_entries(const Eigen::Ref<const Vector>& y, const IndexSet& rows);

/// Coefficient of one appended column in the fit on S plus that column.
struct AugmentedCoefficient {
  double value = 0;
  bool converged = false;
  bool stabilized = false;
  int iterations = 0;
  bool full_refit = false;  ///< warm-started iteration gave up and fit_mle was used
};

/// Fits y on [1, X_S, x] for many candidate columns x.
///
/// The fit on S is computed once. Each augmented fit starts from
/// (beta_S, 0) and iterates Newton steps against the bordered Hessian frozen
/// at that start, which only costs O(n |S|) per step because the S-block is
/// already factored. The iteration converges to the same stationary point as
/// fit_mle; when it stalls, diverges, or runs out of steps, a full fit_mle on
/// the augmented design is used instead.
class NestedFitter {
 public:
  NestedFitter(const Eigen::Ref<const Vector>& y, Matrix design, const Family& family,
               const FitOptions& options = {});

  const PartialFit& base() const noexcept { return base_; }
  Index rows() const noexcept { return xbar_.rows(); }

  /// Throws Error(rank_deficient) when `column` is collinear with [1, X_S].
  AugmentedCoefficient fit_with(const Eigen::Ref<const Vector>& column) const;

  static constexpr int kMaxChordSteps = 60;

 private:
  AugmentedCoefficient full_refit(const Eigen::Ref<const Vector>& column) const;

  Vector y_;
  Matrix xbar_;
  Family family_;
  FitOptions options_;
  PartialFit base_;
  double ridge_ = 0;
  Vector eta_;
  Vector weights_;
  Eigen::LLT<Matrix> hessian_;
};

}  // namespace ssglm
