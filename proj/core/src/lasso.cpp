#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ssglm/error.hpp"
#include "ssglm/selection.hpp"
#include "glm_detail.hpp"

namespace ssglm {

namespace {

constexpr double kMinWeight = 1e-5;

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

// Working weights and mean at the current linear predictor.
void weights_at(const Family& family, const Eigen::Ref<const Vector>& y, const Vector& eta,
                Vector& mu, Vector& w) {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  bool saturated = false;
  detail::evaluate_batch(family, y.array(), eta.array(), m, v, saturated);
  mu = m.matrix();
  w = family.kind() == FamilyKind::gaussian ? Vector::Ones(eta.size())
                                            : Vector(v.max(kMinWeight).matrix());
}

double penalized_objective(const Family& family, const Eigen::Ref<const Vector>& y,
                           const Vector& eta, const Vector& beta, double lambda) {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  bool saturated = false;
  const double total = detail::evaluate_batch(family, y.array(), eta.array(), m, v, saturated);
  if (saturated || !std::isfinite(total)) return std::numeric_limits<double>::infinity();
  return total / static_cast<double>(eta.size()) +
         lambda * beta.tail(beta.size() - 1).lpNorm<1>();
}

double deviance_of(const Family& family, const Eigen::Ref<const Vector>& y, const Vector& eta) {
  double dev = 0.0;
  for (Index i = 0; i < eta.size(); ++i) dev += family.unit_deviance(y[i], eta[i]);
  return dev;
}

// Gradient of the unpenalized objective with respect to the slopes.
Vector slope_gradient(const Family& family, const Eigen::Ref<const Vector>& y,
                      const Eigen::Ref<const Matrix>& X, const Vector& eta) {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  bool saturated = false;
  detail::evaluate_batch(family, y.array(), eta.array(), m, v, saturated);
  const Vector resid = m.matrix() - y;
  return X.transpose() * resid / static_cast<double>(eta.size());
}

struct LambdaSolve {
  bool converged = false;
  int sweeps = 0;
};

class PathSolver {
 public:
  PathSolver(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
             const Family& family, const LassoOptions& options)
      : y_(y), X_(X), family_(family), options_(options), n_(X.rows()), p_(X.cols()) {
    beta_ = Vector::Zero(p_ + 1);
    beta_[0] = family_.link(y_.mean());
    eta_ = Vector::Constant(n_, beta_[0]);
    in_strong_.assign(static_cast<std::size_t>(p_), false);
    grad_ = slope_gradient(family_, y_, X_, eta_);
    const double null_dev = deviance_of(family_, y_, eta_) / static_cast<double>(n_);
    threshold_ = options_.tol * (null_dev > 0.0 ? null_dev : 1.0);
  }

  const Vector& beta() const { return beta_; }
  const Vector& eta() const { return eta_; }

  LambdaSolve solve(double lambda, double previous_lambda) {
    // sequential strong rule, plus anything that was ever nonzero
    const double cutoff = 2.0 * lambda - previous_lambda;
    for (Index j = 0; j < p_; ++j) {
      if (beta_[j + 1] != 0.0 || std::abs(grad_[j]) >= cutoff) mark_strong(j);
    }

    LambdaSolve out;
    Vector mu, w, r;
    double threshold = threshold_;
    for (int outer = 0; outer < options_.max_outer; ++outer) {
      weights_at(family_, y_, eta_, mu, w);
      r = y_ - mu;
      const double w_sum = w.sum();
      xwx_.resize(p_);
      xwx_valid_.assign(static_cast<std::size_t>(p_), false);

      const Vector beta_old = beta_;
      const Vector eta_old = eta_;
      const double obj_old = penalized_objective(family_, y_, eta_, beta_, lambda);

      // coordinate descent on the quadratic approximation: a sweep over the
      // strong set, then cycles over the nonzero coordinates until they settle
      bool active_only = false;
      for (;;) {
        const double max_change = sweep(lambda, w, r, w_sum, active_only);
        ++out.sweeps;
        if (out.sweeps >= options_.max_sweeps) break;
        if (max_change < threshold) {
          if (!active_only) break;
          active_only = false;
        } else if (!active_only) {
          active_only = true;
        }
      }

      // guard the proximal Newton step against objective increase
      double obj = penalized_objective(family_, y_, eta_, beta_, lambda);
      if (family_.kind() != FamilyKind::gaussian) {
        for (int h = 0; h < 30 && !(obj <= obj_old); ++h) {
          beta_ = 0.5 * (beta_ + beta_old);
          eta_ = 0.5 * (eta_ + eta_old);
          obj = penalized_objective(family_, y_, eta_, beta_, lambda);
        }
      }

      grad_ = slope_gradient(family_, y_, X_, eta_);
      bool added = false;
      for (Index j = 0; j < p_; ++j) {
        if (!in_strong_[static_cast<std::size_t>(j)] &&
            std::abs(grad_[j]) > lambda * (1.0 + options_.kkt_tol)) {
          mark_strong(j);
          added = true;
        }
      }
      // weighted size of this round's step; a round that barely moves the
      // coefficients means the quadratic approximations have settled
      double step = w_sum / static_cast<double>(n_) * (beta_[0] - beta_old[0]) * (beta_[0] - beta_old[0]);
      for (const Index j : strong_) {
        const double d = beta_[j + 1] - beta_old[j + 1];
        if (d != 0.0) step = std::max(step, curvature(j, w) * d * d);
      }
      if (!added) {
        if (violation(lambda) <= options_.kkt_tol) {
          out.converged = true;
          break;
        }
        // settled but not yet accurate enough: sweep to a finer tolerance
        if (step < threshold) threshold *= 0.01;
      }
      if (out.sweeps >= options_.max_sweeps) break;
    }
    return out;
  }

  // Max KKT violation relative to lambda, using the cached gradient.
  double violation(double lambda) const {
    double worst = 0.0;
    for (Index j = 0; j < p_; ++j) {
      const double b = beta_[j + 1];
      const double v = b == 0.0 ? std::max(0.0, std::abs(grad_[j]) - lambda)
                                : std::abs(grad_[j] + (b > 0 ? lambda : -lambda));
      worst = std::max(worst, v);
    }
    return worst / lambda;
  }

 private:
  double sweep(double lambda, const Vector& w, Vector& r, double w_sum, bool active_only) {
    const double inv_n = 1.0 / static_cast<double>(n_);
    double max_change = 0.0;
    const double delta0 = r.sum() / w_sum;
    if (delta0 != 0.0) {
      beta_[0] += delta0;
      eta_.array() += delta0;
      r -= delta0 * w;
      max_change = w_sum * inv_n * delta0 * delta0;
    }
    for (const Index j : strong_) {
      const double old = beta_[j + 1];
      if (active_only && old == 0.0) continue;
      const double a = curvature(j, w);
      if (!(a > 0.0)) continue;
      const double g = X_.col(j).dot(r) * inv_n;
      // a zero coordinate sitting on the boundary stays zero despite rounding
      if (old == 0.0 && std::abs(g) <= lambda * (1.0 + 1e-10)) continue;
      const double updated = soft_threshold(g + a * old, lambda) / a;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta_[j + 1] = updated;
        eta_.noalias() += delta * X_.col(j);
        r.noalias() -= delta * w.cwiseProduct(X_.col(j));
        max_change = std::max(max_change, a * delta * delta);
      }
    }
    return max_change;
  }

  void mark_strong(Index j) {
    if (!in_strong_[static_cast<std::size_t>(j)]) {
      in_strong_[static_cast<std::size_t>(j)] = true;
      strong_.insert(std::lower_bound(strong_.begin(), strong_.end(), j), j);
    }
  }

  double curvature(Index j, const Vector& w) {
    if (!xwx_valid_[static_cast<std::size_t>(j)]) {
      xwx_[j] = w.dot(X_.col(j).cwiseAbs2()) / static_cast<double>(n_);
      xwx_valid_[static_cast<std::size_t>(j)] = true;
    }
    return xwx_[j];
  }

  Eigen::Ref<const Vector> y_;
  Eigen::Ref<const Matrix> X_;
  Family family_;
  LassoOptions options_;
  Index n_;
  Index p_;
  double threshold_ = 0.0;
  Vector beta_;
  Vector eta_;
  Vector grad_;
  Vector xwx_;
  std::vector<bool> xwx_valid_;
  std::vector<bool> in_strong_;
  IndexSet strong_;
};

}  // namespace

double lambda_max(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                  const Family& family) {
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "lambda_max: response and design rows differ");
  }
  const Vector eta = Vector::Constant(y.size(), family.link(y.mean()));
  return slope_gradient(family, y, X, eta).lpNorm<Eigen::Infinity>();
}

std::vector<double> lambda_grid(double top, int count, double ratio) {
  if (!(top > 0.0) || count < 1 || !(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "lambda_grid: need top > 0, count >= 1, 0 < ratio < 1");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = top * std::exp(step * k);
  return grid;
}

double kkt_violation(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                     const Family& family, const Vector& beta, double lambda) {
  const Vector eta = (X * beta.tail(X.cols())).array() + beta[0];
  const Vector grad = slope_gradient(family, y, X, eta);
  double worst = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double b = beta[j + 1];
    const double v = b == 0.0 ? std::max(0.0, std::abs(grad[j]) - lambda)
                              : std::abs(grad[j] + (b > 0 ? lambda : -lambda));
    worst = std::max(worst, v);
  }
  return worst / lambda;
}

std::vector<LassoSolution> lasso_path(const Eigen::Ref<const Vector>& y,
                                      const Eigen::Ref<const Matrix>& X, const Family& family,
                                      const std::vector<double>& grid,
                                      const LassoOptions& options) {
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "lasso_path: response and design rows differ");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] < grid[k - 1]))) {
      throw Error(ErrorCode::invalid_argument,
                  "lasso_path: grid must be positive and strictly decreasing");
    }
  }

  PathSolver solver(y, X, family, options);
  const Vector null_eta = Vector::Constant(y.size(), family.link(y.mean()));
  const double null_dev = deviance_of(family, y, null_eta);

  std::vector<LassoSolution> path;
  path.reserve(grid.size());
  double previous = grid.empty() ? 0.0 : grid.front();
  double last_ratio = 0.0;
  for (const double lambda : grid) {
    const LambdaSolve s = solver.solve(lambda, previous);
    previous = lambda;

    LassoSolution sol;
    sol.lambda = lambda;
    sol.beta = solver.beta();
    sol.converged = s.converged;
    sol.sweeps = s.sweeps;
    sol.deviance = deviance_of(family, y, solver.eta());
    for (Index j = 0; j < X.cols(); ++j) {
      if (sol.beta[j + 1] != 0.0) sol.active.push_back(j);
    }
    const bool too_many = options.max_active > 0 &&
                          static_cast<Index>(sol.active.size()) > options.max_active;
    const bool saturated_fit =
        null_dev > 0.0 && 1.0 - sol.deviance / null_dev > options.max_dev_ratio;
    const double ratio = null_dev > 0.0 ? 1.0 - sol.deviance / null_dev : 0.0;
    const bool stalled = path.size() > 1 && ratio - last_ratio < options.min_dev_change;
    last_ratio = ratio;
    path.push_back(std::move(sol));
    if (too_many || saturated_fit || stalled) break;
  }
  return path;
}

}  // namespace ssglm
