#include <cmath>

#include "glm_detail.hpp"
#include "ssglm/error.hpp"
#include "ssglm/glm.hpp"

namespace ssglm {

NestedFitter::NestedFitter(const Eigen::Ref<const Vector>& y, Matrix design, const Family& family,
                           const FitOptions& options)
    : y_(y), family_(family), options_(options) {
  base_ = fit_mle(y_, design, family_, options_);
  xbar_.resize(design.rows(), design.cols() + 1);
  xbar_.col(0).setOnes();
  xbar_.rightCols(design.cols()) = design;
  ridge_ = base_.stabilized ? options_.ridge_penalty : 0.0;

  eta_ = xbar_ * base_.beta;
  Vector mu;
  detail::evaluate(family_, y_, eta_, mu, weights_);
  Matrix hess = base_.info;
  hess.diagonal().array() += ridge_;
  hessian_.compute(hess);
  if (hessian_.info() != Eigen::Success) {
    throw Error(ErrorCode::rank_deficient, "information of the base fit is not positive definite");
  }
}

AugmentedCoefficient NestedFitter::full_refit(const Eigen::Ref<const Vector>& column) const {
  Matrix design(xbar_.rows(), xbar_.cols());
  design.leftCols(xbar_.cols() - 1) = xbar_.rightCols(xbar_.cols() - 1);
  design.col(xbar_.cols() - 1) = column;
  const PartialFit fit = fit_mle(y_, design, family_, options_);
  AugmentedCoefficient out;
  out.value = fit.beta[fit.beta.size() - 1];
  out.converged = fit.converged;
  out.stabilized = fit.stabilized;
  out.iterations = fit.iterations;
  out.full_refit = true;
  return out;
}

AugmentedCoefficient NestedFitter::fit_with(const Eigen::Ref<const Vector>& column) const {
  const Index n = xbar_.rows();
  if (column.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "appended column has the wrong length");
  }
  if (xbar_.cols() + 1 >= n) {
    throw Error(ErrorCode::invalid_argument, "augmented fit would not be low-dimensional");
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  // Bordered Hessian [[A, h], [h^T, c]] frozen at (beta_S, 0).
  const Vector wx = weights_.cwiseProduct(column);
  const Vector h = xbar_.transpose() * wx * inv_n;
  const double c = column.dot(wx) * inv_n + ridge_;
  const Vector v = hessian_.solve(h);
  const double schur = c - h.dot(v);
  if (!(c > 0.0) || !(schur > 1e-10 * c)) {
    throw Error(ErrorCode::rank_deficient, "appended column is collinear with the base design");
  }

  auto penalized = [&](double unpenalized, const Vector& g, double gj) {
    return unpenalized + 0.5 * ridge_ * (g.squaredNorm() + gj * gj);
  };

  Vector gamma = base_.beta;
  double gamma_j = 0.0;
  Vector eta = eta_;
  Vector mu, nu;
  auto pointwise = detail::evaluate(family_, y_, eta, mu, nu);
  double objective = penalized(pointwise.objective, gamma, gamma_j);
  Vector resid = mu - y_;
  Vector grad = xbar_.transpose() * resid * inv_n + ridge_ * gamma;
  double grad_j = column.dot(resid) * inv_n + ridge_ * gamma_j;
  double score = std::max(grad.lpNorm<Eigen::Infinity>(), std::abs(grad_j));

  AugmentedCoefficient out;
  out.stabilized = base_.stabilized;
  Vector cand_eta(n);
  bool saturated = false;
  for (int step = 0; step < kMaxChordSteps; ++step) {
    if (score <= options_.score_tol) {
      out.converged = true;
      break;
    }
    const Vector u = hessian_.solve(grad);
    const double d_j = (grad_j - h.dot(u)) / schur;
    const Vector d = u - v * d_j;
    const Vector deta = xbar_ * d + column * d_j;

    double t = 1.0;
    bool accepted = false;
    Vector cand_gamma;
    double cand_gamma_j = 0.0;
    Vector cand_grad;
    double cand_grad_j = 0.0;
    double cand_obj = 0.0;
    Vector cand_mu, cand_nu;
    for (int halving = 0; halving <= options_.max_halvings; ++halving, t *= 0.5) {
      cand_gamma = gamma - t * d;
      cand_gamma_j = gamma_j - t * d_j;
      cand_eta = eta - t * deta;
      const auto cf = detail::evaluate(family_, y_, cand_eta, cand_mu, cand_nu);
      saturated = saturated || cf.saturated;
      cand_obj = penalized(cf.objective, cand_gamma, cand_gamma_j);
      if (!std::isfinite(cand_obj)) continue;
      const Vector cand_resid = cand_mu - y_;
      cand_grad = xbar_.transpose() * cand_resid * inv_n + ridge_ * cand_gamma;
      cand_grad_j = column.dot(cand_resid) * inv_n + ridge_ * cand_gamma_j;
      const double cand_score =
          std::max(cand_grad.lpNorm<Eigen::Infinity>(), std::abs(cand_grad_j));
      if (detail::accept_step(cand_obj, objective, cand_score, score)) {
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) break;
    gamma.swap(cand_gamma);
    gamma_j = cand_gamma_j;
    eta.swap(cand_eta);
    grad.swap(cand_grad);
    grad_j = cand_grad_j;
    objective = cand_obj;
    score = std::max(grad.lpNorm<Eigen::Infinity>(), std::abs(grad_j));
    if (ridge_ == 0.0 && std::max(gamma.lpNorm<Eigen::Infinity>(), std::abs(gamma_j)) >
                             options_.divergence_bound) {
      break;
    }
  }
  if (!out.converged && score <= options_.score_tol) out.converged = true;
  if (!out.converged) return full_refit(column);
  out.value = gamma_j;
  return out;
}

}  // namespace ssglm
