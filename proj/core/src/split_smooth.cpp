#include "ssglm/split_smooth.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <string>

#include "ssglm/error.hpp"
#include "ssglm/parallel.hpp"

namespace ssglm {

namespace {

// Greedy subset of S whose columns, together with the intercept, are linearly
// independent on these rows.
IndexSet independent_columns(const Eigen::Ref<const Matrix>& X, const IndexSet& S) {
  const Index n = X.rows();
  Matrix basis(n, static_cast<Index>(S.size()) + 1);
  basis.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  Index used = 1;
  IndexSet kept;
  for (const Index c : S) {
    Vector v = X.col(c);
    const double norm0 = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
    }
    const double norm = v.norm();
    if (norm0 > 0.0 && norm > 1e-9 * norm0) {
      basis.col(used++) = v / norm;
      kept.push_back(c);
    }
  }
  return kept;
}

}  // namespace

IndexSet SplitPlan::estimation_rows(Index b) const {
  IndexSet rows;
  rows.reserve(static_cast<std::size_t>(n1));
  for (Index i = 0; i < n; ++i) {
    if (membership(b, i)) rows.push_back(i);
  }
  return rows;
}

IndexSet SplitPlan::selection_rows(Index b) const {
  IndexSet rows;
  rows.reserve(static_cast<std::size_t>(n - n1));
  for (Index i = 0; i < n; ++i) {
    if (!membership(b, i)) rows.push_back(i);
  }
  return rows;
}

SplitPlan make_splits(Index n, double q, Index B, std::uint64_t seed) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::degenerate_split, "split proportion q must lie in (0, 1)");
  }
  if (B < 1) throw Error(ErrorCode::degenerate_split, "need at least one split");
  const auto n1 = static_cast<Index>(std::llround(q * static_cast<double>(n)));
  if (n1 < 2 || n - n1 < 2) {
    throw Error(ErrorCode::degenerate_split,
                "split sizes n1 = " + std::to_string(n1) + ", n2 = " + std::to_string(n - n1) +
                    " are degenerate (both need at least 2 samples)");
  }
  SplitPlan plan;
  plan.n = n;
  plan.n1 = n1;
  plan.q = q;
  plan.B = B;
  plan.seed = seed;
  plan.membership.setZero(B, n);
  const Stream root(seed);
  for (Index b = 0; b < B; ++b) {
    Stream stream = root.substream(static_cast<std::uint64_t>(b));
    for (const auto i : sample_without_replacement(n, n1, stream)) plan.membership(b, i) = 1;
  }
  return plan;
}

OneTimeEstimate one_time_estimate(const Eigen::Ref<const Vector>& y1,
                                  const Eigen::Ref<const Matrix>& X1, const IndexSet& S,
                                  const Family& family, const FitOptions& options) {
  const Index n1 = X1.rows();
  const Index p = X1.cols();
  if (y1.size() != n1) {
    throw Error(ErrorCode::dimension_mismatch, "one_time_estimate: response and design rows differ");
  }
  if (static_cast<Index>(S.size()) + 2 > n1) {
    throw Error(ErrorCode::invalid_argument,
                "one_time_estimate: |S| + 2 = " + std::to_string(S.size() + 2) +
                    " exceeds the estimation half size " + std::to_string(n1));
  }

  OneTimeEstimate out;
  out.beta_tilde = Vector::Constant(p + 1, std::numeric_limits<double>::quiet_NaN());

  IndexSet base_set = S;
  std::optional<NestedFitter> fitter;
  try {
    fitter.emplace(y1, select_columns(X1, base_set), family, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::rank_deficient) throw;
    base_set = independent_columns(X1, S);
    std::set_difference(S.begin(), S.end(), base_set.begin(), base_set.end(),
                        std::back_inserter(out.pruned));
    fitter.emplace(y1, select_columns(X1, base_set), family, options);
  }

  const PartialFit& base = fitter->base();
  if (base.stabilized) ++out.stabilized_count;
  if (base.converged) {
    out.beta_tilde[0] = base.beta[0];
    for (std::size_t k = 0; k < base_set.size(); ++k) {
      out.beta_tilde[base_set[k] + 1] = base.beta[static_cast<Index>(k) + 1];
    }
  } else {
    out.failed.push_back(0);
    for (const Index c : base_set) out.failed.push_back(c + 1);
  }

  std::vector<bool> in_base(static_cast<std::size_t>(p), false);
  for (const Index c : base_set) in_base[static_cast<std::size_t>(c)] = true;
  for (Index c = 0; c < p; ++c) {
    if (in_base[static_cast<std::size_t>(c)]) continue;
    try {
      const AugmentedCoefficient a = fitter->fit_with(X1.col(c));
      if (a.stabilized) ++out.stabilized_count;
      if (a.full_refit) ++out.full_refits;
      if (a.converged && std::isfinite(a.value)) {
        out.beta_tilde[c + 1] = a.value;
      } else {
        out.failed.push_back(c + 1);
      }
    } catch (const Error&) {
      out.failed.push_back(c + 1);
    }
  }
  std::sort(out.failed.begin(), out.failed.end());
  return out;
}

SplitSelection select_for_split(const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Matrix>& X, const SplitPlan& plan, Index b,
                                const Family& family, const Selector& selector) {
  const IndexSet rows = plan.selection_rows(b);
  const Matrix X2 = take_rows(X, rows);
  const Vector y2 = take_entries(y, rows);
  const Stream split_stream = Stream(plan.seed).substream(static_cast<std::uint64_t>(b));

  SplitSelection out;
  SelectionResult result;
  try {
    result = selector.select(y2, X2, family, split_stream.substream("cv"));
  } catch (const std::exception& first) {
    out.retried = true;
    out.warnings.push_back(std::string("selection failed, retrying: ") + first.what());
    try {
      result = selector.select(y2, X2, family, split_stream.substream("retry").substream("cv"));
    } catch (const std::exception& second) {
      throw Error(ErrorCode::selection_failed, "selection failed twice on split " +
                                                   std::to_string(b) + ": " + second.what());
    }
  }
  for (auto& w : result.warnings) out.warnings.push_back(std::move(w));

  IndexSet selected = result.selected;
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  const auto cap = static_cast<std::size_t>(plan.n1 / 2);
  if (selected.size() > cap) {
    if (result.scores) {
      const Vector& scores = *result.scores;
      std::stable_sort(selected.begin(), selected.end(),
                       [&](Index a, Index c) { return scores[a] > scores[c]; });
    }
    selected.resize(cap);
    std::sort(selected.begin(), selected.end());
    out.warnings.push_back("selected set trimmed to n1/2 = " + std::to_string(cap));
  }
  if (4 * static_cast<Index>(selected.size()) > plan.n1) {
    out.warnings.push_back("selected set larger than n1/4; partial regressions may be unstable");
  }
  out.selected = std::move(selected);
  return out;
}

Matrix SmoothedFit::estimate_matrix() const {
  const Index B = static_cast<Index>(splits.size());
  Matrix out(B, beta_hat.size());
  for (Index b = 0; b < B; ++b) out.row(b) = splits[static_cast<std::size_t>(b)].beta_tilde.transpose();
  return out;
}

ValidityMask SmoothedFit::validity() const {
  const Index B = static_cast<Index>(splits.size());
  ValidityMask mask = ValidityMask::Constant(B, beta_hat.size(), true);
  for (Index b = 0; b < B; ++b) {
    for (const Index j : splits[static_cast<std::size_t>(b)].failed) mask(b, j) = false;
  }
  return mask;
}

SmoothedFit ssglm_fit(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                      const Family& family, const Selector& selector,
                      const SsglmOptions& options) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (y.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "ssglm_fit: response and design rows differ");
  }
  if (options.B < 1) throw Error(ErrorCode::invalid_argument, "ssglm_fit: B must be >= 1");

  SmoothedFit fit;
  fit.family = family;
  fit.plan = make_splits(n, options.q, options.B, options.seed);
  fit.splits.resize(static_cast<std::size_t>(options.B));

  parallel_for(options.B, options.threads, [&](std::ptrdiff_t bi) {
    const auto b = static_cast<Index>(bi);
    SplitEstimate& est = fit.splits[static_cast<std::size_t>(b)];
    est.b = b;
    SplitSelection sel = select_for_split(y, X, fit.plan, b, family, selector);
    est.selected = std::move(sel.selected);
    est.retried = sel.retried;
    est.warnings = std::move(sel.warnings);

    const IndexSet rows = fit.plan.estimation_rows(b);
    OneTimeEstimate one =
        one_time_estimate(take_entries(y, rows), take_rows(X, rows), est.selected, family, options.fit);
    est.beta_tilde = std::move(one.beta_tilde);
    est.failed = std::move(one.failed);
    est.stabilized_count = one.stabilized_count;
    est.pruned = std::move(one.pruned);
  });

  // fixed-order reduction
  fit.beta_hat = Vector::Zero(p + 1);
  fit.effective_splits.assign(static_cast<std::size_t>(p + 1), 0);
  const ValidityMask valid = fit.validity();
  for (Index j = 0; j <= p; ++j) {
    double sum = 0.0;
    Index count = 0;
    for (Index b = 0; b < options.B; ++b) {
      if (!valid(b, j)) continue;
      sum += fit.splits[static_cast<std::size_t>(b)].beta_tilde[j];
      ++count;
    }
    fit.effective_splits[static_cast<std::size_t>(j)] = count;
    fit.beta_hat[j] = count > 0 ? sum / static_cast<double>(count)
                                : std::numeric_limits<double>::quiet_NaN();
    if (count == 0) {
      fit.warnings.push_back("coefficient " + std::to_string(j) + " failed in every split");
    }
  }

  fit.selection_freq = Vector::Zero(p);
  Index stabilized = 0;
  for (const SplitEstimate& est : fit.splits) {
    for (const Index c : est.selected) fit.selection_freq[c] += 1.0;
    stabilized += est.stabilized_count;
  }
  fit.selection_freq /= static_cast<double>(options.B);
  if (stabilized > 0) {
    fit.warnings.push_back(std::to_string(stabilized) + " partial fits used the ridge fallback");
  }
  return fit;
}

SmoothedFit ssglm_fit(const Dataset& data, const Family& family, const Selector& selector,
                      const SsglmOptions& options) {
  validate_dataset(data, family);
  return ssglm_fit(data.y, data.X, family, selector, options);
}

}  // namespace ssglm
