#include "ssglm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ssglm/error.hpp"
#include "ssglm/parallel.hpp"
#include "ssglm/stats.hpp"

namespace ssglm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_plan(const SplitPlan& plan, Index estimate_rows) {
  if (plan.B < 2) {
    throw Error(ErrorCode::insufficient_splits, "variance estimation needs at least 2 splits");
  }
  if (estimate_rows != plan.B || plan.membership.rows() != plan.B ||
      plan.membership.cols() != plan.n) {
    throw Error(ErrorCode::dimension_mismatch, "split estimates do not match the split plan");
  }
}

bool column_fully_valid(const ValidityMask* valid, Index j) {
  return valid == nullptr || valid->col(j).all();
}

}  // namespace

double jackknife_factor(Index n, Index n1) {
  const auto nd = static_cast<double>(n);
  const auto n2 = static_cast<double>(n - n1);
  return nd * (nd - 1.0) / (n2 * n2);
}

Vector jackknife_variance(const SplitPlan& plan, const Eigen::Ref<const Matrix>& estimates,
                          const Eigen::Ref<const Vector>& center, const ValidityMask* valid,
                          Matrix* cov_out) {
  check_plan(plan, estimates.rows());
  const Index m = estimates.cols();
  const Index n = plan.n;
  const Index B = plan.B;
  if (center.size() != m || (valid && (valid->rows() != B || valid->cols() != m))) {
    throw Error(ErrorCode::dimension_mismatch, "jackknife_variance: inconsistent sizes");
  }
  const double factor = jackknife_factor(n, plan.n1);
  const Matrix J = plan.membership.cast<double>();

  Vector v(m);
  if (cov_out) cov_out->setConstant(n, m, kNaN);

  // Columns estimated in every split share one centered membership matrix.
  std::vector<Index> dense;
  std::vector<Index> masked;
  for (Index j = 0; j < m; ++j) {
    (column_fully_valid(valid, j) ? dense : masked).push_back(j);
  }
  if (!dense.empty()) {
    const Matrix Jc = J.rowwise() - J.colwise().mean();
    Matrix D(B, static_cast<Index>(dense.size()));
    for (std::size_t k = 0; k < dense.size(); ++k) {
      D.col(static_cast<Index>(k)) = estimates.col(dense[k]).array() - center[dense[k]];
    }
    const Matrix C = (Jc.transpose() * D) / static_cast<double>(B);
    for (std::size_t k = 0; k < dense.size(); ++k) {
      const Index j = dense[k];
      v[j] = factor * C.col(static_cast<Index>(k)).squaredNorm();
      if (cov_out) cov_out->col(j) = C.col(static_cast<Index>(k));
    }
  }
  for (const Index j : masked) {
    std::vector<Index> rows;
    for (Index b = 0; b < B; ++b) {
      if ((*valid)(b, j)) rows.push_back(b);
    }
    const auto Bj = static_cast<Index>(rows.size());
    if (Bj < 2) {
      v[j] = kNaN;
      continue;
    }
    Vector jbar = Vector::Zero(n);
    for (const Index b : rows) jbar += J.row(b).transpose();
    jbar /= static_cast<double>(Bj);
    Vector c = Vector::Zero(n);
    for (const Index b : rows) {
      c += (J.row(b).transpose() - jbar) * (estimates(b, j) - center[j]);
    }
    c /= static_cast<double>(Bj);
    v[j] = factor * c.squaredNorm();
    if (cov_out) cov_out->col(j) = c;
  }
  return v;
}

Vector bias_corrected_variance(const SplitPlan& plan, const Eigen::Ref<const Vector>& v_hat,
                               const Eigen::Ref<const Matrix>& estimates,
                               const Eigen::Ref<const Vector>& center,
                               std::vector<bool>& clamped, const ValidityMask* valid) {
  check_plan(plan, estimates.rows());
  const Index m = estimates.cols();
  if (v_hat.size() != m || center.size() != m) {
    throw Error(ErrorCode::dimension_mismatch, "bias_corrected_variance: inconsistent sizes");
  }
  const auto n = static_cast<double>(plan.n);
  const double ratio = static_cast<double>(plan.n1) / static_cast<double>(plan.n - plan.n1);
  Vector out(m);
  clamped.assign(static_cast<std::size_t>(m), false);
  for (Index j = 0; j < m; ++j) {
    if (!std::isfinite(v_hat[j])) {
      out[j] = kNaN;
      continue;
    }
    double ss = 0.0;
    Index Bj = 0;
    for (Index b = 0; b < plan.B; ++b) {
      if (valid && !(*valid)(b, j)) continue;
      const double d = estimates(b, j) - center[j];
      ss += d * d;
      ++Bj;
    }
    const double Bd = static_cast<double>(Bj);
    const double corrected = v_hat[j] - n / (Bd * Bd) * ratio * ss;
    if (corrected <= 0.0) {
      out[j] = 1e-12 * v_hat[j];
      clamped[static_cast<std::size_t>(j)] = true;
    } else {
      out[j] = corrected;
    }
  }
  return out;
}

VarianceEstimate estimate_variance(const SmoothedFit& fit, bool keep_cov) {
  const Matrix est = fit.estimate_matrix();
  const ValidityMask valid = fit.validity();
  VarianceEstimate out;
  Matrix cov;
  out.v_hat = jackknife_variance(fit.plan, est, fit.beta_hat, &valid, keep_cov ? &cov : nullptr);
  out.v_hat_B = bias_corrected_variance(fit.plan, out.v_hat, est, fit.beta_hat, out.clamped, &valid);
  if (keep_cov) out.cov = std::move(cov);
  return out;
}

InferenceReport coordinate_inference(const Eigen::Ref<const Vector>& beta_hat,
                                     const Eigen::Ref<const Vector>& variance, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
  }
  const Index m = beta_hat.size();
  if (variance.size() != m) {
    throw Error(ErrorCode::dimension_mismatch, "coordinate_inference: inconsistent sizes");
  }
  const double multiplier = stats::normal_quantile(1.0 - alpha / 2.0);
  const double tests = static_cast<double>(std::max<Index>(m - 1, 1));

  InferenceReport r;
  r.alpha = alpha;
  r.beta_hat = beta_hat;
  r.se.resize(m);
  r.z.resize(m);
  r.ci_lower.resize(m);
  r.ci_upper.resize(m);
  r.p_values.resize(m);
  r.bonferroni.resize(m);
  r.selection_freq = Vector::Constant(m, kNaN);
  r.clamped.assign(static_cast<std::size_t>(m), false);
  Index degenerate = 0;
  for (Index j = 0; j < m; ++j) {
    const double b = beta_hat[j];
    const double v = variance[j];
    if (!std::isfinite(b) || !std::isfinite(v) || v < 0.0) {
      r.se[j] = r.z[j] = r.ci_lower[j] = r.ci_upper[j] = r.p_values[j] = r.bonferroni[j] = kNaN;
      continue;
    }
    const double se = std::sqrt(v);
    r.se[j] = se;
    r.ci_lower[j] = b - multiplier * se;
    r.ci_upper[j] = b + multiplier * se;
    if (b == 0.0) {
      r.z[j] = 0.0;
      r.p_values[j] = 1.0;
    } else if (se == 0.0) {
      r.z[j] = std::copysign(std::numeric_limits<double>::infinity(), b);
      r.p_values[j] = 0.0;
      ++degenerate;
    } else {
      r.z[j] = b / se;
      r.p_values[j] = stats::two_sided_normal_p(r.z[j]);
    }
    r.bonferroni[j] = std::min(1.0, tests * r.p_values[j]);
  }
  if (degenerate > 0) {
    r.warnings.push_back(std::to_string(degenerate) +
                         " coefficients have zero variance; their p-values are set to 0");
  }
  return r;
}

InferenceReport infer(const SmoothedFit& fit, double alpha) {
  return infer(fit, estimate_variance(fit), alpha);
}

InferenceReport infer(const SmoothedFit& fit, const VarianceEstimate& v, double alpha) {
  InferenceReport r = coordinate_inference(fit.beta_hat, v.v_hat_B, alpha);
  r.clamped = v.clamped;
  r.effective_splits = fit.effective_splits;
  for (Index j = 0; j < fit.selection_freq.size(); ++j) r.selection_freq[j + 1] = fit.selection_freq[j];
  const auto n_clamped = std::count(v.clamped.begin(), v.clamped.end(), true);
  if (n_clamped > 0) {
    r.warnings.push_back(std::to_string(n_clamped) +
                         " bias-corrected variances were not positive and were floored");
  }
  return r;
}

// ---------------------------------------------------------------------------

SubvectorFit subvector_fit(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                           const Family& family, const Selector& selector, const IndexSet& S1,
                           const SsglmOptions& options) {
  const Index p = X.cols();
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "subvector_fit: response and design rows differ");
  }
  if (S1.empty()) throw Error(ErrorCode::invalid_argument, "subvector_fit: empty subset");
  for (std::size_t k = 0; k < S1.size(); ++k) {
    if (S1[k] < 0 || S1[k] >= p) {
      throw Error(ErrorCode::invalid_argument,
                  "subvector_fit: column " + std::to_string(S1[k]) + " out of range");
    }
    if (std::find(S1.begin(), S1.begin() + static_cast<std::ptrdiff_t>(k), S1[k]) !=
        S1.begin() + static_cast<std::ptrdiff_t>(k)) {
      throw Error(ErrorCode::invalid_argument, "subvector_fit: repeated column in subset");
    }
  }

  SubvectorFit out;
  out.subset = S1;
  out.plan = make_splits(X.rows(), options.q, options.B, options.seed);
  const auto p1 = static_cast<Index>(S1.size());
  out.estimates.setConstant(options.B, p1, kNaN);
  out.valid_splits.assign(static_cast<std::size_t>(options.B), false);
  std::vector<std::string> failures(static_cast<std::size_t>(options.B));

  parallel_for(options.B, options.threads, [&](std::ptrdiff_t bi) {
    const auto b = static_cast<Index>(bi);
    const SplitSelection sel = select_for_split(y, X, out.plan, b, family, selector);
    IndexSet design = S1;
    for (const Index c : sel.selected) {
      if (std::find(S1.begin(), S1.end(), c) == S1.end()) design.push_back(c);
    }
    const IndexSet rows = out.plan.estimation_rows(b);
    const auto keep = static_cast<std::size_t>(std::max<Index>(out.plan.n1 - 2, p1));
    if (design.size() > keep) design.resize(keep);
    try {
      const PartialFit f =
          fit_subset(take_entries(y, rows), take_rows(X, rows), design, family, options.fit);
      if (!f.converged) {
        failures[static_cast<std::size_t>(b)] = "joint fit did not converge";
        return;
      }
      out.estimates.row(b) = f.beta.segment(1, p1).transpose();
      out.valid_splits[static_cast<std::size_t>(b)] = true;
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(b)] = e.what();
    }
  });

  out.beta1_hat = Vector::Zero(p1);
  for (Index b = 0; b < options.B; ++b) {
    if (!out.valid_splits[static_cast<std::size_t>(b)]) continue;
    out.beta1_hat += out.estimates.row(b).transpose();
    ++out.effective_splits;
  }
  if (out.effective_splits == 0) {
    throw Error(ErrorCode::fit_failed, "subvector_fit: the joint fit failed in every split");
  }
  out.beta1_hat /= static_cast<double>(out.effective_splits);
  if (out.effective_splits < options.B) {
    out.warnings.push_back(std::to_string(options.B - out.effective_splits) +
                           " splits dropped: " + failures[static_cast<std::size_t>(
                               std::find(out.valid_splits.begin(), out.valid_splits.end(), false) -
                               out.valid_splits.begin())]);
  }
  return out;
}

SubvectorFit subvector_fit(const Dataset& data, const Family& family, const Selector& selector,
                           const IndexSet& S1, const SsglmOptions& options) {
  validate_dataset(data, family);
  return subvector_fit(data.y, data.X, family, selector, S1, options);
}

Matrix subvector_covariance(const SplitPlan& plan, const Eigen::Ref<const Matrix>& estimates,
                            const Eigen::Ref<const Vector>& center,
                            const std::vector<bool>* valid_splits) {
  check_plan(plan, estimates.rows());
  const Index p1 = estimates.cols();
  if (center.size() != p1) {
    throw Error(ErrorCode::dimension_mismatch, "subvector_covariance: inconsistent sizes");
  }
  std::vector<Index> rows;
  for (Index b = 0; b < plan.B; ++b) {
    if (!valid_splits || (*valid_splits)[static_cast<std::size_t>(b)]) rows.push_back(b);
  }
  const auto Bv = static_cast<Index>(rows.size());
  if (Bv < 2) {
    throw Error(ErrorCode::insufficient_splits, "subvector covariance needs 2 usable splits");
  }
  Matrix J(Bv, plan.n);
  Matrix D(Bv, p1);
  for (Index k = 0; k < Bv; ++k) {
    J.row(k) = plan.membership.row(rows[static_cast<std::size_t>(k)]).cast<double>();
    D.row(k) = estimates.row(rows[static_cast<std::size_t>(k)]) - center.transpose();
  }
  J.rowwise() -= J.colwise().mean();
  const Matrix C = (J.transpose() * D) / static_cast<double>(Bv);  // n x p1
  Matrix sigma = jackknife_factor(plan.n, plan.n1) * (C.transpose() * C);
  return 0.5 * (sigma + sigma.transpose());
}

Matrix subvector_covariance(const SubvectorFit& fit) {
  return subvector_covariance(fit.plan, fit.estimates, fit.beta1_hat, &fit.valid_splits);
}

ContrastTest contrast_test(const Eigen::Ref<const Vector>& beta1_hat,
                           const Eigen::Ref<const Matrix>& sigma1_hat,
                           const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Vector>& R) {
  const Index p1 = beta1_hat.size();
  const Index r = Q.rows();
  if (sigma1_hat.rows() != p1 || sigma1_hat.cols() != p1 || Q.cols() != p1 || R.size() != r) {
    std::ostringstream msg;
    msg << "contrast_test: Q is " << Q.rows() << "x" << Q.cols() << ", R has " << R.size()
        << " entries, subvector has " << p1;
    throw Error(ErrorCode::dimension_mismatch, msg.str());
  }
  if (r == 0) throw Error(ErrorCode::contrast_rank, "contrast_test: Q has no rows");
  Eigen::FullPivLU<Matrix> lu(Q);
  lu.setThreshold(1e-10);
  if (lu.rank() != r) {
    throw Error(ErrorCode::contrast_rank, "contrast_test: Q has rank " +
                                              std::to_string(lu.rank()) + " but " +
                                              std::to_string(r) + " rows");
  }

  Matrix M = Q * sigma1_hat * Q.transpose();
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  const Vector& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  const double floor = 1e-12 * std::max(top, std::numeric_limits<double>::min());
  std::vector<Index> offending;
  for (Index k = 0; k < r; ++k) {
    if (ev[k] > floor && top > 0.0) continue;
    for (Index row = 0; row < r; ++row) {
      if (std::abs(eig.eigenvectors()(row, k)) > 1e-8 &&
          std::find(offending.begin(), offending.end(), row) == offending.end()) {
        offending.push_back(row);
      }
    }
  }
  if (!offending.empty()) {
    std::sort(offending.begin(), offending.end());
    std::ostringstream msg;
    msg << "contrast_test: Q Sigma Q^T is singular; offending contrast rows:";
    for (const Index row : offending) msg << ' ' << row;
    throw Error(ErrorCode::singular_contrast, msg.str());
  }

  ContrastTest t;
  t.beta1_hat = beta1_hat;
  t.sigma1_hat = sigma1_hat;
  t.Q = Q;
  t.R = R;
  t.df = r;
  const Vector d = Q * beta1_hat - R;
  const Vector w = eig.eigenvectors().transpose() * d;
  t.T = std::max(0.0, (w.array().square() / ev.array()).sum());
  t.p_value = stats::chi_squared_upper(t.T, static_cast<double>(r));
  return t;
}

}  // namespace ssglm
