#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ssglm/error.hpp"
#include "ssglm/selection.hpp"
#include "glm_detail.hpp"

namespace ssglm {

namespace {

// Slope of y ~ 1 + x. NaN when the fit has no finite solution.
double marginal_slope(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& x,
                      const Family& family) {
  const Index n = y.size();
  const double nd = static_cast<double>(n);
  const double x_mean = x.mean();
  const double sxx = (x.array() - x_mean).square().sum();
  if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  if (family.kind() == FamilyKind::gaussian) {
    return ((x.array() - x_mean) * y.array()).sum() / sxx;
  }

  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-8;
  constexpr double kBound = 30.0;
  const Eigen::ArrayXd ya = y.array();
  const Eigen::ArrayXd xa = x.array();
  Eigen::ArrayXd mu;
  Eigen::ArrayXd nu;
  auto objective = [&](double b0, double b1, double ridge) {
    bool saturated = false;
    const double total = detail::evaluate_batch(family, ya, b0 + b1 * xa, mu, nu, saturated);
    if (saturated || !std::isfinite(total)) return std::numeric_limits<double>::infinity();
    return total / nd + 0.5 * ridge * (b0 * b0 + b1 * b1);
  };

  auto solve = [&](double ridge, bool& diverged) {
    double b0 = family.link(y.mean());
    double b1 = 0.0;
    double obj = objective(b0, b1, ridge);  // leaves mu, nu at (b0, b1)
    diverged = false;
    for (int iter = 0; iter < kMaxIter; ++iter) {
      const Eigen::ArrayXd r = mu - ya;
      const double g0 = r.sum() / nd + ridge * b0;
      const double g1 = (r * xa).sum() / nd + ridge * b1;
      const double h00 = nu.sum() / nd + ridge;
      const double h01 = (nu * xa).sum() / nd;
      const double h11 = (nu * xa.square()).sum() / nd + ridge;
      if (std::max(std::abs(g0), std::abs(g1)) <= kTol) break;
      const double det = h00 * h11 - h01 * h01;
      if (!(det > 0.0)) break;
      const double s0 = (h11 * g0 - h01 * g1) / det;
      const double s1 = (h00 * g1 - h01 * g0) / det;
      double t = 1.0;
      bool accepted = false;
      for (int h = 0; h < 30; ++h, t *= 0.5) {
        const double cand = objective(b0 - t * s0, b1 - t * s1, ridge);
        if (cand <= obj) {
          b0 -= t * s0;
          b1 -= t * s1;
          obj = cand;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      if (ridge == 0.0 && std::max(std::abs(b0), std::abs(b1)) > kBound) {
        diverged = true;
        break;
      }
    }
    return b1;
  };

  bool diverged = false;
  double slope = solve(0.0, diverged);
  if (diverged) slope = solve(1e-6, diverged);
  return slope;
}

}  // namespace

Index default_sis_cap(Index rows) {
  if (rows < 3) return 1;
  return std::max<Index>(1, static_cast<Index>(std::floor(static_cast<double>(rows) /
                                                          std::log(static_cast<double>(rows)))));
}

SelectionResult sis_select(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                           const Family& family, Index cap) {
  if (cap < 1) throw Error(ErrorCode::invalid_argument, "sis_select: cap must be >= 1");
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "sis_select: response and design rows differ");
  }
  const Index p = X.cols();
  SelectionResult result;
  Vector scores(p);
  for (Index j = 0; j < p; ++j) {
    const double slope = marginal_slope(y, X.col(j), family);
    if (std::isfinite(slope)) {
      scores[j] = std::abs(slope);
    } else {
      scores[j] = -std::numeric_limits<double>::infinity();
      result.warnings.push_back("column " + std::to_string(j) +
                                ": marginal fit not finite, ranked last");
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] > scores[b]; });
  const auto keep = static_cast<std::size_t>(std::min(cap, p));
  result.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(result.selected.begin(), result.selected.end());
  result.scores = std::move(scores);
  return result;
}

}  // namespace ssglm
