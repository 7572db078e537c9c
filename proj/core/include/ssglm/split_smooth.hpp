#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssglm/dataset.hpp"
#include "ssglm/glm.hpp"
#include "ssglm/rng.hpp"
#include "ssglm/selection.hpp"
#include "ssglm/types.hpp"

namespace ssglm {

/// B random partitions of the n samples into an estimation half D1 (size n1)
/// and a selection half D2.
struct SplitPlan {
  Index n = 0;
  Index n1 = 0;
  double q = 0.5;
  Index B = 0;
  std::uint64_t seed = 0;
  /// B x n, entry (b, i) = 1 iff sample i is in D1 of split b.
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> membership;

  IndexSet estimation_rows(Index b) const;
  IndexSet selection_rows(Index b) const;
};

/// Split b draws its D1 from Stream(seed).substream(b). n1 = round(q n).
SplitPlan make_splits(Index n, double q, Index B, std::uint64_t seed);

struct OneTimeEstimate {
  Vector beta_tilde;           ///< length p + 1
  std::vector<Index> failed;   ///< coefficient positions without a usable fit
  Index stabilized_count = 0;  ///< sub-fits that needed the ridge fallback
  Index full_refits = 0;       ///< augmented fits that fell back to a full fit
  IndexSet pruned;             ///< columns of S dropped as collinear on D1
};

/// One-time estimator on the estimation half: coefficient j comes from the
/// fit of y1 on S plus column j (just S when j is already in S) and the
/// intercept from the fit on S alone.
OneTimeEstimate one_time_estimate(const Eigen::Ref<const Vector>& y1,
                                  const Eigen::Ref<const Matrix>& X1, const IndexSet& S,
                                  const Family& family, const FitOptions& options = {});

struct SplitEstimate {
  Index b = 0;
  IndexSet selected;
  Vector beta_tilde;
  Index stabilized_count = 0;
  std::vector<Index> failed;
  IndexSet pruned;
  bool retried = false;
  std::vector<std::string> warnings;
};

struct SsglmOptions {
  double q = 0.5;
  Index B = 500;
  std::uint64_t seed = 0;
  int threads = 1;
  FitOptions fit{};
};

struct SmoothedFit {
  Family family;
  Vector beta_hat;  ///< length p + 1, intercept first
  std::vector<SplitEstimate> splits;
  SplitPlan plan;
  Vector selection_freq;                ///< length p
  std::vector<Index> effective_splits;  ///< per coefficient, splits that entered its average
  std::vector<std::string> warnings;

  /// B x (p + 1) matrix of per-split estimates (failed entries are NaN).
  Matrix estimate_matrix() const;
  ValidityMask validity() const;
};

/// Selection on D2 of split b. Retries once on a fresh substream if the
/// selector throws, then throws Error(selection_failed). The result is capped
/// at floor(n1 / 2) columns, keeping the highest-scoring ones.
struct SplitSelection {
  IndexSet selected;
  bool retried = false;
  std::vector<std::string> warnings;
};
SplitSelection select_for_split(const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Matrix>& X, const SplitPlan& plan, Index b,
                                const Family& family, const Selector& selector);

/// Smoothed estimator: mean over B splits of the one-time estimates, reduced
/// in split order so the result does not depend on `threads`.
SmoothedFit ssglm_fit(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& X,
                      const Family& family, const Selector& selector,
                      const SsglmOptions& options);
SmoothedFit ssglm_fit(const Dataset& data, const Family& family, const Selector& selector,
                      const SsglmOptions& options);

}  // namespace ssglm
