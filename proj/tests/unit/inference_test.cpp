#include <cmath>

#include <gtest/gtest.h>

#include "ssglm/error.hpp"
#include "ssglm/inference.hpp"
#include "ssglm/stats.hpp"
#include "test_util.hpp"

namespace ssglm {
namespace {

using testing::centered;
using testing::draw_response;
using testing::normal_matrix;

/// The four-sample, two-split plan used for hand calculations.
SplitPlan hand_plan() {
  SplitPlan plan;
  plan.n = 4;
  plan.n1 = 2;
  plan.B = 2;
  plan.membership.resize(2, 4);
  plan.membership << 1, 1, 0, 0, 0, 0, 1, 1;
  return plan;
}

class FixedSelector final : public Selector {
 public:
  explicit FixedSelector(IndexSet s) : s_(std::move(s)) {}
  SelectionResult select(const Eigen::Ref<const Vector>&, const Eigen::Ref<const Matrix>&,
                         const Family&, Stream) const override {
    SelectionResult r;
    r.selected = s_;
    return r;
  }
  std::string name() const override { return "fixed"; }

 private:
  IndexSet s_;
};

TEST(JackknifeVariance, HandExample) {
  const SplitPlan plan = hand_plan();
  const Matrix est = Matrix{{1.0}, {3.0}};
  const Vector center{{2.0}};
  Matrix cov;
  const Vector v = jackknife_variance(plan, est, center, nullptr, &cov);
  EXPECT_DOUBLE_EQ(jackknife_factor(4, 2), 3.0);
  EXPECT_DOUBLE_EQ(v[0], 3.0);
  ASSERT_EQ(cov.rows(), 4);
  EXPECT_DOUBLE_EQ(cov(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(cov(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(cov(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(cov(3, 0), 0.5);

  std::vector<bool> clamped;
  const Vector vb = bias_corrected_variance(plan, v, est, center, clamped);
  EXPECT_DOUBLE_EQ(vb[0], 1.0);
  EXPECT_FALSE(clamped[0]);
}

TEST(JackknifeVariance, ConstantEstimatesGiveZero) {
  const SplitPlan plan = make_splits(30, 0.5, 10, 1);
  const Matrix est = Matrix::Constant(10, 3, 0.7);
  const Vector center = Vector::Constant(3, 0.7);
  const Vector v = jackknife_variance(plan, est, center);
  EXPECT_EQ(v, Vector::Zero(3));
  std::vector<bool> clamped;
  const Vector vb = bias_corrected_variance(plan, v, est, center, clamped);
  EXPECT_EQ(vb, Vector::Zero(3));
}

TEST(JackknifeVariance, NeedsTwoSplits) {
  const SplitPlan plan = make_splits(10, 0.5, 1, 1);
  try {
    (void)jackknife_variance(plan, Matrix::Zero(1, 2), Vector::Zero(2));
    FAIL() << "expected insufficient_splits";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_splits);
  }
}

TEST(JackknifeVariance, InvalidSplitsAreDroppedPerColumn) {
  const SplitPlan plan = make_splits(20, 0.5, 6, 2);
  Matrix est = normal_matrix(6, 2, Stream(80));
  ValidityMask valid = ValidityMask::Constant(6, 2, true);
  valid(2, 1) = false;
  est(2, 1) = std::nan("");
  Vector center(2);
  center[0] = est.col(0).mean();
  double total = 0.0;
  for (Index b = 0; b < 6; ++b) {
    if (b != 2) total += est(b, 1);
  }
  center[1] = total / 5.0;
  const Vector v = jackknife_variance(plan, est, center, &valid);
  EXPECT_TRUE(std::isfinite(v[1]));

  // column 1 equals a direct computation on the five usable splits
  SplitPlan reduced = plan;
  reduced.B = 5;
  reduced.membership.resize(5, 20);
  Matrix col(5, 1);
  for (Index b = 0, r = 0; b < 6; ++b) {
    if (b == 2) continue;
    reduced.membership.row(r) = plan.membership.row(b);
    col(r++, 0) = est(b, 1);
  }
  EXPECT_NEAR(v[1], jackknife_variance(reduced, col, Vector{{center[1]}})[0], 1e-15);
}

struct Fitted {
  Matrix X;
  Vector y;
  SmoothedFit fit;
};

Fitted fitted_poisson(Index B, std::uint64_t seed) {
  Fitted f;
  f.X = centered(normal_matrix(120, 30, Stream(seed)));
  Vector beta = Vector::Zero(31);
  beta[0] = 0.5;
  beta[3] = 0.6;
  beta[17] = -0.4;
  f.y = draw_response(f.X, beta, Family::poisson(), Stream(seed + 1));
  SsglmOptions options;
  options.B = B;
  options.seed = seed + 2;
  f.fit = ssglm_fit(f.y, f.X, Family::poisson(), SisSelector(8), options);
  return f;
}

TEST(BiasCorrectedVariance, NeverExceedsTheUncorrectedValue) {
  const Fitted f = fitted_poisson(40, 81);
  const VarianceEstimate v = estimate_variance(f.fit);
  const Matrix est = f.fit.estimate_matrix();
  const Index B = est.rows();
  const double n = 120.0, n1 = 60.0;
  for (Index j = 0; j < v.v_hat.size(); ++j) {
    EXPECT_GE(v.v_hat[j], 0.0);
    EXPECT_LE(v.v_hat_B[j], v.v_hat[j]);
    EXPECT_GE(v.v_hat_B[j], 0.0);
    const double correction = n / static_cast<double>(B * B) * (n1 / (n - n1)) *
                              (est.col(j).array() - f.fit.beta_hat[j]).square().sum();
    const double raw = v.v_hat[j] - correction;
    if (raw > 0.0) {
      EXPECT_FALSE(v.clamped[static_cast<std::size_t>(j)]);
      EXPECT_NEAR(v.v_hat_B[j], raw, 1e-15 * v.v_hat[j]);
    } else {
      EXPECT_TRUE(v.clamped[static_cast<std::size_t>(j)]);
      EXPECT_DOUBLE_EQ(v.v_hat_B[j], 1e-12 * v.v_hat[j]);
    }
  }
}

TEST(BiasCorrectedVariance, CorrectionVanishesForLargeB) {
  // gaussian, n = 40; the two estimators approach each other as B grows
  const Matrix X = centered(normal_matrix(40, 6, Stream(82)));
  Vector beta = Vector::Zero(7);
  beta[1] = 1.0;
  const Vector y = draw_response(X, beta, Family::gaussian(), Stream(83));
  auto variances = [&](Index B) {
    SsglmOptions options;
    options.B = B;
    options.seed = 84;
    return estimate_variance(ssglm_fit(y, X, Family::gaussian(), SisSelector(2), options));
  };
  const VarianceEstimate small = variances(80);
  const VarianceEstimate large = variances(800);
  for (Index j = 0; j < 7; ++j) {
    // standard errors agree within 5% at B = 20 n
    EXPECT_LE(std::sqrt(large.v_hat[j] / large.v_hat_B[j]) - 1.0, 0.05) << "j=" << j;
    // the variance gap is a Monte Carlo term of order n / B
    const double gap_small = small.v_hat[j] - small.v_hat_B[j];
    const double gap_large = large.v_hat[j] - large.v_hat_B[j];
    EXPECT_GT(gap_large, 0.0);
    EXPECT_NEAR(gap_small / gap_large, 10.0, 4.0) << "j=" << j;
  }
}

TEST(CoordinateInference, ZeroEstimateHasUnitPValue) {
  const InferenceReport r = coordinate_inference(Vector{{0.0, 1.0}}, Vector{{0.04, 0.25}}, 0.05);
  EXPECT_DOUBLE_EQ(r.p_values[0], 1.0);
  EXPECT_DOUBLE_EQ(r.ci_lower[0], -r.ci_upper[0]);
}

TEST(CoordinateInference, IntervalUsesTheNormalQuantile) {
  const InferenceReport r = coordinate_inference(Vector{{0.3, 1.0}}, Vector{{0.04, 0.25}}, 0.05);
  EXPECT_NEAR((r.ci_upper[1] - r.beta_hat[1]) / r.se[1], 1.959964, 1e-6);
  EXPECT_DOUBLE_EQ(r.se[1], 0.5);
  EXPECT_DOUBLE_EQ(r.z[1], 2.0);
  EXPECT_NEAR(r.p_values[1], stats::two_sided_normal_p(2.0), 1e-15);
  // one predictor: Bonferroni multiplies by 1
  EXPECT_DOUBLE_EQ(r.bonferroni[1], r.p_values[1]);
  for (Index j = 0; j < 2; ++j) {
    EXPECT_LE(r.ci_lower[j], r.beta_hat[j]);
    EXPECT_GE(r.ci_upper[j], r.beta_hat[j]);
  }
}

TEST(CoordinateInference, BonferroniUsesThePredictorCount) {
  const Vector beta{{1.0, 0.1, 0.2, 0.05}};
  const Vector var = Vector::Constant(4, 0.01);
  const InferenceReport r = coordinate_inference(beta, var, 0.05);
  for (Index j = 1; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(r.bonferroni[j], std::min(1.0, 3.0 * r.p_values[j]));
    EXPECT_GE(r.p_values[j], 0.0);
    EXPECT_LE(r.p_values[j], 1.0);
  }
}

TEST(CoordinateInference, ZeroVarianceIsFlagged) {
  const InferenceReport r = coordinate_inference(Vector{{0.0, 0.4}}, Vector{{0.1, 0.0}}, 0.05);
  EXPECT_DOUBLE_EQ(r.p_values[1], 0.0);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Infer, ScaleEquivarianceForGaussianResponses) {
  const Matrix X = centered(normal_matrix(80, 25, Stream(85)));
  Vector beta = Vector::Zero(26);
  beta[0] = 1.0;
  beta[2] = 0.8;
  beta[9] = -0.5;
  const Vector y = draw_response(X, beta, Family::gaussian(), Stream(86));
  SsglmOptions options;
  options.B = 30;
  options.seed = 87;
  const InferenceReport base =
      infer(ssglm_fit(y, X, Family::gaussian(), SisSelector(6), options));
  for (const double c : {3.0, -0.25}) {
    const Vector yc = c * y;
    const InferenceReport scaled =
        infer(ssglm_fit(yc, X, Family::gaussian(), SisSelector(6), options));
    for (Index j = 0; j < 26; ++j) {
      EXPECT_NEAR(scaled.beta_hat[j], c * base.beta_hat[j], 1e-10 * std::abs(c));
      EXPECT_NEAR(scaled.se[j], std::abs(c) * base.se[j], 1e-10 * std::abs(c));
      EXPECT_NEAR(scaled.p_values[j], base.p_values[j], 1e-10);
    }
  }
}

TEST(Infer, SelectionFrequencyIsNaNAtTheIntercept) {
  const Fitted f = fitted_poisson(10, 88);
  const InferenceReport r = infer(f.fit);
  EXPECT_TRUE(std::isnan(r.selection_freq[0]));
  EXPECT_DOUBLE_EQ(r.selection_freq[4], f.fit.selection_freq[3]);
  EXPECT_EQ(r.beta_hat, f.fit.beta_hat);
}

TEST(ContrastTest, ReducesToTheSquaredZTest) {
  const Fitted f = fitted_poisson(30, 89);
  const VarianceEstimate v = estimate_variance(f.fit);
  const InferenceReport r = infer(f.fit, v, 0.05);
  for (const Index j : {1, 4, 18}) {
    const Vector b{{f.fit.beta_hat[j]}};
    const Matrix sigma{{v.v_hat_B[j]}};
    const ContrastTest t = contrast_test(b, sigma, Matrix::Identity(1, 1), Vector::Zero(1));
    EXPECT_NEAR(t.T, r.z[j] * r.z[j], 1e-10 * std::max(1.0, t.T));
    EXPECT_NEAR(t.p_value, r.p_values[j], 1e-10);
    EXPECT_EQ(t.df, 1);
  }
}

TEST(ContrastTest, PublishedTwoCoefficientExample) {
  const Vector b{{-0.067, 0.005}};
  const Matrix sigma{{0.44, -0.43}, {-0.43, 0.50}};
  const ContrastTest t = contrast_test(b, sigma, Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_GE(t.T, 0.056);
  EXPECT_LE(t.T, 0.062);
  EXPECT_NEAR(t.p_value, 0.97, 0.005);
  EXPECT_EQ(t.df, 2);
}

TEST(ContrastTest, HypothesisAtTheEstimateGivesZero) {
  const Vector b{{0.3, -0.2, 0.5}};
  const Matrix sigma = Matrix::Identity(3, 3) * 0.1;
  const Matrix Q{{1.0, 1.0, 0.0}, {0.0, 1.0, -1.0}};
  const ContrastTest t = contrast_test(b, sigma, Q, Q * b);
  EXPECT_NEAR(t.T, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(t.p_value, 1.0);
}

TEST(ContrastTest, RankAndSingularityErrors) {
  const Vector b{{0.3, -0.2}};
  const Matrix sigma{{1.0, 1.0}, {1.0, 1.0}};
  try {
    (void)contrast_test(b, Matrix::Identity(2, 2), Matrix{{1.0, 2.0}, {2.0, 4.0}}, Vector::Zero(2));
    FAIL() << "expected contrast_rank";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::contrast_rank);
  }
  try {
    (void)contrast_test(b, sigma, Matrix{{1.0, -1.0}}, Vector::Zero(1));
    FAIL() << "expected singular_contrast";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_contrast);
    EXPECT_NE(std::string(e.what()).find("row"), std::string::npos);
  }
  EXPECT_THROW(contrast_test(b, sigma, Matrix::Identity(1, 3), Vector::Zero(1)), Error);
  EXPECT_THROW(contrast_test(b, sigma, Matrix::Identity(2, 2), Vector::Zero(1)), Error);
}

TEST(SubvectorCovariance, SingleCoordinateMatchesJackknife) {
  const SplitPlan plan = make_splits(50, 0.5, 20, 90);
  const Matrix est = normal_matrix(20, 1, Stream(91));
  const Vector center{{est.mean()}};
  const Matrix sigma = subvector_covariance(plan, est, center);
  EXPECT_NEAR(sigma(0, 0), jackknife_variance(plan, est, center)[0], 1e-15);
  EXPECT_EQ(subvector_covariance(plan, Matrix::Constant(20, 2, 1.5), Vector::Constant(2, 1.5)),
            Matrix::Zero(2, 2));
}

TEST(SubvectorCovariance, DiagonalMatchesCoordinateVariances) {
  const SplitPlan plan = make_splits(40, 0.5, 15, 92);
  const Matrix est = normal_matrix(15, 3, Stream(93));
  const Vector center = est.colwise().mean();
  const Matrix sigma = subvector_covariance(plan, est, center);
  const Vector v = jackknife_variance(plan, est, center);
  EXPECT_TRUE(sigma.isApprox(sigma.transpose(), 0.0));
  for (Index k = 0; k < 3; ++k) EXPECT_NEAR(sigma(k, k), v[k], 1e-15);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(sigma).eigenvalues().minCoeff(), -1e-15);
}

TEST(SubvectorFit, AgreesWithTheCoordinatePathWhenAlwaysSelected) {
  const Matrix X = centered(normal_matrix(100, 12, Stream(94)));
  Vector beta = Vector::Zero(13);
  beta[3] = 0.5;
  beta[8] = -0.4;
  const Vector y = draw_response(X, beta, Family::poisson(), Stream(95));
  const FixedSelector selector(IndexSet{2, 5, 7});
  SsglmOptions options;
  options.B = 20;
  options.seed = 96;
  const SmoothedFit fit = ssglm_fit(y, X, Family::poisson(), selector, options);
  const VarianceEstimate v = estimate_variance(fit);
  const SubvectorFit sub = subvector_fit(y, X, Family::poisson(), selector, IndexSet{7}, options);
  EXPECT_EQ(sub.effective_splits, 20);
  EXPECT_NEAR(sub.beta1_hat[0], fit.beta_hat[8], 1e-10);
  EXPECT_NEAR(subvector_covariance(sub)(0, 0), v.v_hat[8], 1e-10);
}

TEST(SubvectorFit, RejectsBadSubsets) {
  const Matrix X = centered(normal_matrix(30, 5, Stream(97)));
  const Vector y = Vector::Ones(30);
  SsglmOptions options;
  options.B = 2;
  EXPECT_THROW(subvector_fit(y, X, Family::poisson(), SisSelector(2), IndexSet{}, options), Error);
  EXPECT_THROW(subvector_fit(y, X, Family::poisson(), SisSelector(2), IndexSet{5}, options), Error);
  EXPECT_THROW(subvector_fit(y, X, Family::poisson(), SisSelector(2), IndexSet{1, 1}, options),
               Error);
}

}  // namespace
}  // namespace ssglm
