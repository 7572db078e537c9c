#include "ssglm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "glm_detail.hpp"
#include "ssglm/error.hpp"

namespace ssglm {

namespace {

void check_dimensions(Index beta_size, const Eigen::Ref<const Vector>& y,
                      const Eigen::Ref<const Matrix>& design) {
  if (y.size() != design.rows()) {
    throw Error(ErrorCode::dimension_mismatch,
                "response has " + std::to_string(y.size()) + " rows but design has " +
                    std::to_string(design.rows()));
  }
  if (beta_size != design.cols() + 1) {
    throw Error(ErrorCode::dimension_mismatch,
                "coefficient vector has length " + std::to_string(beta_size) + ", expected " +
                    std::to_string(design.cols() + 1));
  }
}

Matrix with_intercept(const Eigen::Ref<const Matrix>& design) {
  Matrix xbar(design.rows(), design.cols() + 1);
  xbar.col(0).setOnes();
  xbar.rightCols(design.cols()) = design;
  return xbar;
}

double mean_response(const Eigen::Ref<const Vector>& y) { return y.mean(); }

struct NewtonOutcome {
  Vector beta;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool saturated = false;
  double score_norm = 0;
};

Matrix information_at(const Matrix& xbar, const Vector& nu) {
  const Index k = xbar.cols();
  const double inv_n = 1.0 / static_cast<double>(xbar.rows());
  Matrix weighted = xbar.array().colwise() * nu.array().sqrt();
  Matrix info = Matrix::Zero(k, k);
  info.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(), inv_n);
  info.triangularView<Eigen::StrictlyUpper>() = info.transpose();
  return info;
}

// Damped Newton on (1/n) sum {A(eta) - y eta} + (ridge/2) |beta|^2.
NewtonOutcome newton(const Matrix& xbar, const Vector& y, const Family& family,
                     const FitOptions& options, double ridge) {
  const Index n = xbar.rows();
  const Index k = xbar.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  NewtonOutcome out;
  out.beta = Vector::Zero(k);
  out.beta[0] = family.link(mean_response(y));

  Vector eta = xbar * out.beta;
  Vector mu, nu;
  auto fit = detail::evaluate(family, y, eta, mu, nu);
  double objective = fit.objective + 0.5 * ridge * out.beta.squaredNorm();
  Vector grad = xbar.transpose() * (mu - y) * inv_n + ridge * out.beta;
  double score = grad.lpNorm<Eigen::Infinity>();

  Vector cand_eta(n), cand_mu(n), cand_nu(n);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (score <= options.score_tol) {
      out.converged = true;
      break;
    }
    Matrix hess = information_at(xbar, nu);
    hess.diagonal().array() += ridge;
    Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() != Eigen::Success) break;
    const Vector step = ldlt.solve(grad);
    const Vector deta = xbar * step;

    double t = 1.0;
    bool accepted = false;
    Vector cand_beta;
    Vector cand_grad;
    double cand_obj = 0.0;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      cand_beta = out.beta - t * step;
      cand_eta = eta - t * deta;
      auto cf = detail::evaluate(family, y, cand_eta, cand_mu, cand_nu);
      out.saturated = out.saturated || cf.saturated;
      cand_obj = cf.objective + 0.5 * ridge * cand_beta.squaredNorm();
      if (!std::isfinite(cand_obj)) continue;
      cand_grad = xbar.transpose() * (cand_mu - y) * inv_n + ridge * cand_beta;
      if (detail::accept_step(cand_obj, objective, cand_grad.lpNorm<Eigen::Infinity>(), score)) {
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) break;
    out.beta = cand_beta;
    eta.swap(cand_eta);
    mu.swap(cand_mu);
    nu.swap(cand_nu);
    grad = cand_grad;
    objective = cand_obj;
    score = grad.lpNorm<Eigen::Infinity>();
    if (ridge == 0.0 && out.beta.lpNorm<Eigen::Infinity>() > options.divergence_bound) {
      out.diverged = true;
      break;
    }
  }
  if (!out.converged && score <= options.score_tol) out.converged = true;
  out.score_norm = score;
  return out;
}

}  // namespace

double neg_log_likelihood(const Eigen::Ref<const Vector>& beta, const Eigen::Ref<const Vector>& y,
                          const Eigen::Ref<const Matrix>& design, const Family& family) {
  check_dimensions(beta.size(), y, design);
  const Vector eta = (design * beta.tail(design.cols())).array() + beta[0];
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    total += family.cumulant(eta[i]) - y[i] * eta[i];
  }
  return total / static_cast<double>(y.size());
}

ScoreInformation score_and_information(const Eigen::Ref<const Vector>& beta,
                                       const Eigen::Ref<const Vector>& y,
                                       const Eigen::Ref<const Matrix>& design,
                                       const Family& family) {
  check_dimensions(beta.size(), y, design);
  const Matrix xbar = with_intercept(design);
  const Vector eta = xbar * beta;
  Vector mu(eta.size()), nu(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    const FamilyValues v = family.eval(eta[i]);
    mu[i] = v.mean;
    nu[i] = v.variance;
  }
  ScoreInformation out;
  out.score = xbar.transpose() * (mu - y) / static_cast<double>(y.size());
  out.information = information_at(xbar, nu);
  return out;
}

PartialFit fit_mle(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& design,
                   const Family& family, const FitOptions& options) {
  check_dimensions(design.cols() + 1, y, design);
  const Index n = design.rows();
  const Index k = design.cols() + 1;
  if (k >= n) {
    throw Error(ErrorCode::invalid_argument,
                "partial regression needs more rows (" + std::to_string(n) +
                    ") than coefficients (" + std::to_string(k) + ")");
  }
  if (!y.allFinite() || !design.allFinite()) {
    throw Error(ErrorCode::non_finite_value, "fit_mle: non-finite input");
  }

  const Matrix xbar = with_intercept(design);
  Eigen::ColPivHouseholderQR<Matrix> qr(xbar);
  if (qr.rank() < k) {
    throw Error(ErrorCode::rank_deficient, "design has rank " + std::to_string(qr.rank()) +
                                               " < " + std::to_string(k) + " columns");
  }

  PartialFit fit;
  if (family.kind() == FamilyKind::gaussian) {
    fit.beta = qr.solve(y);
    fit.iterations = 1;
  } else {
    NewtonOutcome outcome = newton(xbar, y, family, options, 0.0);
    if (outcome.diverged && options.ridge_fallback) {
      outcome = newton(xbar, y, family, options, options.ridge_penalty);
      fit.stabilized = true;
    }
    fit.beta = std::move(outcome.beta);
    fit.iterations = outcome.iterations;
    fit.saturated = outcome.saturated;
  }

  const Vector eta = xbar * fit.beta;
  Vector mu, nu;
  const auto pointwise = detail::evaluate(family, y, eta, mu, nu);
  fit.neg_loglik = pointwise.objective;
  fit.saturated = fit.saturated || pointwise.saturated;
  fit.info = information_at(xbar, nu);
  Vector grad = xbar.transpose() * (mu - y) / static_cast<double>(n);
  if (fit.stabilized) grad += options.ridge_penalty * fit.beta;
  fit.score_norm = grad.lpNorm<Eigen::Infinity>();
  fit.converged = std::isfinite(fit.score_norm) && fit.score_norm <= options.score_tol;
  return fit;
}

Matrix select_columns(const Eigen::Ref<const Matrix>& X, const IndexSet& subset) {
  Matrix out(X.rows(), static_cast<Index>(subset.size()));
  for (std::size_t c = 0; c < subset.size(); ++c) {
    if (subset[c] < 0 || subset[c] >= X.cols()) {
      throw Error(ErrorCode::dimension_mismatch,
                  "column index " + std::to_string(subset[c]) + " out of range");
    }
    out.col(static_cast<Index>(c)) = X.col(subset[c]);
  }
  return out;
}

PartialFit fit_subset(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                      const IndexSet& subset, const Family& family, const FitOptions& options) {
  PartialFit fit = fit_mle(y, select_columns(X, subset), family, options);
  fit.subset = subset;
  return fit;
}

Matrix take_rows(const Eigen::Ref<const Matrix>& X, const IndexSet& rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r), c) = X(rows[r], c);
  }
  return out;
}

Vector take_entries(const Eigen::Ref<const Vector>& y, const IndexSet& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Index>(r)] = y[rows[r]];
  return out;
}

}  // namespace ssglm
