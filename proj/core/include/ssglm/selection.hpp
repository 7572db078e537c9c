#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssglm/family.hpp"
#include "ssglm/rng.hpp"
#include "ssglm/types.hpp"

namespace ssglm {

struct SelectionResult {
  IndexSet selected;              ///< sorted ascending, unique
  std::optional<Vector> scores;   ///< per-column ranking statistic (larger = stronger)
  std::optional<double> lambda;   ///< tuning value used, when the selector has one
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Sure independence screening

/// floor(n / log n), the usual screening size for n rows.
Index default_sis_cap(Index rows);

/// Ranks columns by |slope| of the marginal GLM y ~ 1 + x_j and keeps the top
/// `cap`. Ties go to the smaller index; columns whose marginal fit is not
/// finite rank last and produce a warning.
SelectionResult sis_select(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                           const Family& family, Index cap);

// ---------------------------------------------------------------------------
// L1-penalized GLM

struct LassoOptions {
  int max_outer = 100;    ///< quadratic-approximation (IRLS) rounds per lambda
  int max_sweeps = 5000;  ///< coordinate sweeps per round
  /// Sweep convergence: max weighted squared coefficient change, relative to
  /// the per-row null deviance.
  double tol = 1e-7;
  double kkt_tol = 1e-4;  ///< relative KKT slack accepted before declaring convergence
  /// Stop the path once more than this many predictors are active (0 = never).
  Index max_active = 0;
  /// Stop the path once the fraction of null deviance explained exceeds this.
  double max_dev_ratio = 1.0;
  /// Stop the path once a grid step improves that fraction by less than this.
  double min_dev_change = 0.0;
};

struct LassoSolution {
  double lambda = 0;
  IndexSet active;
  Vector beta;  ///< length p + 1, intercept first
  bool converged = false;
  int sweeps = 0;
  double deviance = 0;
};

/// Smallest lambda at which all slopes are zero: max_j |x_j^T (mu_null - y)| / n.
double lambda_max(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                  const Family& family);

/// `count` log-spaced values from `top` down to ratio * top.
std::vector<double> lambda_grid(double top, int count = 100, double ratio = 1e-3);

/// Coordinate-descent solutions of (1/n) sum{A(eta) - y eta} + lambda * |beta_{-0}|_1
/// along a strictly decreasing grid, warm-started from one value to the next.
/// The path may end early if `options` sets a stopping rule.
std::vector<LassoSolution> lasso_path(const Eigen::Ref<const Vector>& y,
                                      const Eigen::Ref<const Matrix>& X, const Family& family,
                                      const std::vector<double>& grid,
                                      const LassoOptions& options = {});

/// Max violation of the lasso optimality conditions at `beta`, relative to lambda.
double kkt_violation(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                     const Family& family, const Vector& beta, double lambda);

struct CvOptions {
  int folds = 10;
  int n_lambda = 100;
  double lambda_ratio = 1e-3;
  LassoOptions lasso{};
  /// KKT slack for the fold paths, which only feed held-out deviances.
  double fold_kkt_tol = 1e-2;
};

/// K-fold cross-validated lasso. Picks the grid value with the smallest mean
/// held-out deviance and returns its active set, trimmed to the rows/2
/// largest |coefficients| if it is bigger. An empty grid means the default
/// grid built from lambda_max.
SelectionResult cv_select(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                          const Family& family, Stream stream, const CvOptions& options = {},
                          std::vector<double> grid = {});

// ---------------------------------------------------------------------------
// Pluggable selection scheme used on the selection half of each split

class Selector {
 public:
  virtual ~Selector() = default;
  virtual SelectionResult select(const Eigen::Ref<const Vector>& y,
                                 const Eigen::Ref<const Matrix>& X, const Family& family,
                                 Stream stream) const = 0;
  virtual std::string name() const = 0;
};

class SisSelector final : public Selector {
 public:
  /// cap = 0 uses default_sis_cap(rows).
  explicit SisSelector(Index cap = 0) : cap_(cap) {}
  SelectionResult select(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                         const Family& family, Stream stream) const override;
  std::string name() const override { return "sis"; }

 private:
  Index cap_;
};

class CvLassoSelector final : public Selector {
 public:
  explicit CvLassoSelector(CvOptions options = {}) : options_(options) {}
  SelectionResult select(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                         const Family& family, Stream stream) const override;
  std::string name() const override { return "lasso-cv"; }

 private:
  CvOptions options_;
};

/// Declarative selector choice, as read from configs and scenario files.
struct SelectorSpec {
  std::string kind = "sis";  ///< "sis" or "lasso-cv"
  Index sis_cap = 0;
  int folds = 10;
  int n_lambda = 100;
  double lambda_ratio = 1e-3;
};

std::unique_ptr<Selector> make_selector(const SelectorSpec& spec);

}  // namespace ssglm
