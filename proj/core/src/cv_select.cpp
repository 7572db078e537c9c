#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ssglm/error.hpp"
#include "ssglm/glm.hpp"
#include "ssglm/selection.hpp"

namespace ssglm {


SelectionResult cv_select(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                          const Family& family, Stream stream, const CvOptions& options,
                          std::vector<double> grid) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (y.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "cv_select: response and design rows differ");
  }
  if (options.folds < 2 || options.folds > n) {
    throw Error(ErrorCode::invalid_argument, "cv_select: need 2 <= folds <= rows");
  }

  SelectionResult result;
  if (grid.empty()) {
    const double top = lambda_max(y, X, family);
    if (!(top > 0.0)) {
      // y is constant or uncorrelated with every column: nothing to select
      result.lambda = 0.0;
      result.scores = Vector::Zero(p);
      result.warnings.push_back("lambda_max is zero; empty selection");
      return result;
    }
    grid = lambda_grid(top, options.n_lambda, options.lambda_ratio);
  }

  LassoOptions lasso = options.lasso;
  if (lasso.max_active == 0) lasso.max_active = n / 2;
  if (!(lasso.max_dev_ratio < 1.0)) lasso.max_dev_ratio = 0.999;

  const std::vector<LassoSolution> full = lasso_path(y, X, family, grid, lasso);
  const std::size_t length = full.size();
  std::vector<double> used(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(length));

  // balanced random folds
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto k = static_cast<Index>(stream.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
  }
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % options.folds);
  }

  LassoOptions fold_lasso = options.lasso;
  fold_lasso.kkt_tol = std::max(fold_lasso.kkt_tol, options.fold_kkt_tol);
  std::vector<double> cv_loss(length, 0.0);
  for (int f = 0; f < options.folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    }
    const Matrix X_train = take_rows(X, train);
    const Vector y_train = take_entries(y, train);
    const Matrix X_test = take_rows(X, test);
    const Vector y_test = take_entries(y, test);
    const std::vector<LassoSolution> path = lasso_path(y_train, X_train, family, used, fold_lasso);
    for (std::size_t k = 0; k < length; ++k) {
      // a fold path that stopped early keeps its last solution
      const LassoSolution& sol = path[std::min(k, path.size() - 1)];
      const Vector eta = (X_test * sol.beta.tail(p)).array() + sol.beta[0];
      double dev = 0.0;
      for (Index i = 0; i < eta.size(); ++i) dev += family.unit_deviance(y_test[i], eta[i]);
      cv_loss[k] += dev;
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < length; ++k) {
    if (cv_loss[k] < cv_loss[best]) best = k;
  }
  const LassoSolution& chosen = full[best];
  result.lambda = chosen.lambda;
  result.scores = chosen.beta.tail(p).cwiseAbs();
  result.selected = chosen.active;
  if (!chosen.converged) {
    result.warnings.push_back("lasso did not converge at the selected lambda");
  }

  const auto cap = static_cast<std::size_t>(n / 2);
  if (result.selected.size() > cap) {
    const Vector& scores = *result.scores;
    std::stable_sort(result.selected.begin(), result.selected.end(),
                     [&](Index a, Index b) { return scores[a] > scores[b]; });
    result.selected.resize(cap);
    std::sort(result.selected.begin(), result.selected.end());
  }
  return result;
}

}  // namespace ssglm
