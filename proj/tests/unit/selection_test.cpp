#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ssglm/error.hpp"
#include "ssglm/glm.hpp"
#include "ssglm/selection.hpp"
#include "test_util.hpp"

namespace ssglm {
namespace {

using testing::centered;
using testing::draw_response;
using testing::normal_matrix;

bool contains(const IndexSet& s, Index j) { return std::binary_search(s.begin(), s.end(), j); }

TEST(Sis, DefaultCapIsNOverLogN) {
  EXPECT_EQ(default_sis_cap(200), static_cast<Index>(std::floor(200 / std::log(200.0))));
  EXPECT_EQ(default_sis_cap(150), 29);
}

TEST(Sis, SingleStrongPredictorRanksFirst) {
  Stream root(31);
  int misses = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const Matrix X = centered(normal_matrix(200, 100, root.substream(seed)));
    Vector beta = Vector::Zero(101);
    const Index strong = (seed * 7) % 100;
    beta[strong + 1] = 0.8;
    const Vector y = draw_response(X, beta, Family::poisson(), root.substream(1000 + seed));
    const SelectionResult r = sis_select(y, X, Family::poisson(), 1);
    if (r.selected != IndexSet{strong}) ++misses;
  }
  EXPECT_LE(misses, 1);  // at most 2% of 50 seeds
}

TEST(Sis, FullCapSelectsEverything) {
  const Matrix X = centered(normal_matrix(50, 12, Stream(32)));
  const Vector y = draw_response(X, Vector::Zero(13), Family::binomial(), Stream(33));
  const SelectionResult r = sis_select(y, X, Family::binomial(), 12);
  ASSERT_EQ(r.selected.size(), 12u);
  for (Index j = 0; j < 12; ++j) EXPECT_EQ(r.selected[static_cast<std::size_t>(j)], j);
  EXPECT_EQ(sis_select(y, X, Family::binomial(), 40).selected.size(), 12u);
}

TEST(Sis, IdenticalColumnsPreferTheSmallerIndex) {
  Matrix X = centered(normal_matrix(80, 6, Stream(34)));
  X.col(4) = X.col(1);
  Vector beta = Vector::Zero(7);
  beta[2] = 1.0;
  const Vector y = draw_response(X, beta, Family::gaussian(), Stream(35));
  const SelectionResult r = sis_select(y, X, Family::gaussian(), 1);
  EXPECT_EQ(r.selected, IndexSet{1});
  EXPECT_EQ((*r.scores)[1], (*r.scores)[4]);
}

TEST(Sis, ScreeningIsMonotoneInTheCap) {
  const Matrix X = centered(normal_matrix(120, 60, Stream(36)));
  Vector beta = Vector::Zero(61);
  beta[5] = 0.5;
  beta[20] = -0.4;
  const Vector y = draw_response(X, beta, Family::poisson(), Stream(37));
  IndexSet previous;
  for (Index d = 1; d <= 60; ++d) {
    const IndexSet now = sis_select(y, X, Family::poisson(), d).selected;
    EXPECT_EQ(static_cast<Index>(now.size()), d);
    for (const Index j : previous) EXPECT_TRUE(contains(now, j)) << "d=" << d << " lost " << j;
    previous = now;
  }
}

TEST(Sis, ConstantColumnRanksLastWithWarning) {
  Matrix X = centered(normal_matrix(40, 5, Stream(38)));
  X.col(3).setZero();
  const Vector y = draw_response(X, Vector::Zero(6), Family::poisson(), Stream(39));
  const SelectionResult r = sis_select(y, X, Family::poisson(), 4);
  EXPECT_FALSE(contains(r.selected, 3));
  ASSERT_EQ(r.warnings.size(), 1u);
}

TEST(Sis, RejectsBadArguments) {
  const Matrix X = normal_matrix(10, 3, Stream(40));
  EXPECT_THROW(sis_select(Vector::Zero(10), X, Family::gaussian(), 0), Error);
  EXPECT_THROW(sis_select(Vector::Zero(9), X, Family::gaussian(), 1), Error);
}

TEST(Lasso, GridIsLogSpaced) {
  const auto grid = lambda_grid(2.0, 100, 1e-3);
  ASSERT_EQ(grid.size(), 100u);
  EXPECT_DOUBLE_EQ(grid.front(), 2.0);
  EXPECT_NEAR(grid.back(), 2e-3, 1e-15);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    EXPECT_NEAR(grid[k] / grid[k - 1], std::pow(1e-3, 1.0 / 99), 1e-12);
  }
  EXPECT_THROW(lambda_grid(0.0), Error);
}

TEST(Lasso, NothingIsActiveAtLambdaMax) {
  for (const Family f : {Family::gaussian(), Family::binomial(), Family::poisson()}) {
    const Matrix X = centered(normal_matrix(100, 30, Stream(41)));
    Vector beta = Vector::Zero(31);
    beta[3] = 0.7;
    const Vector y = draw_response(X, beta, f, Stream(42));
    const double top = lambda_max(y, X, f);
    const auto path = lasso_path(y, X, f, {2.0 * top, top});
    ASSERT_EQ(path.size(), 2u);
    EXPECT_TRUE(path[0].active.empty());
    EXPECT_TRUE(path[1].active.empty());
    EXPECT_NEAR(path[1].beta[0], f.link(y.mean()), 1e-8);
  }
}

TEST(Lasso, OrthonormalGaussianDesignSoftThresholds) {
  const Index n = 100, p = 8;
  Matrix A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = normal_matrix(n, p, Stream(43));
  const Matrix Qfull = Eigen::HouseholderQR<Matrix>(A).householderQ() * Matrix::Identity(n, p + 1);
  // columns orthogonal to the intercept with x^T x / n = 1
  const Matrix X = Qfull.rightCols(p) * std::sqrt(static_cast<double>(n));
  Vector beta = Vector::Zero(p + 1);
  beta << 0.5, 1.0, -0.6, 0.3, 0, 0, 0.1, -0.05, 0;
  const Vector y = draw_response(X, beta, Family::gaussian(), Stream(44));
  const Vector z = X.transpose() * y / static_cast<double>(n);
  const double top = lambda_max(y, X, Family::gaussian());
  const auto grid = lambda_grid(top, 20, 0.01);
  LassoOptions options;
  options.kkt_tol = 1e-9;
  const auto path = lasso_path(y, X, Family::gaussian(), grid, options);
  ASSERT_EQ(path.size(), grid.size());
  for (const LassoSolution& s : path) {
    EXPECT_NEAR(s.beta[0], y.mean(), 1e-6);
    for (Index j = 0; j < p; ++j) {
      const double soft = std::copysign(std::max(std::abs(z[j]) - s.lambda, 0.0), z[j]);
      EXPECT_NEAR(s.beta[j + 1], soft, 1e-6) << "lambda=" << s.lambda << " j=" << j;
    }
  }
}

TEST(Lasso, SmallLambdaApproachesTheMle) {
  for (const Family f : {Family::gaussian(), Family::binomial(), Family::poisson()}) {
    const Matrix X = centered(normal_matrix(200, 6, Stream(45)));
    Vector beta(7);
    beta << 0.2, 0.6, -0.5, 0.4, 0.3, -0.3, 0.5;
    const Vector y = draw_response(X, beta, f, Stream(46));
    const auto grid = lambda_grid(lambda_max(y, X, f), 60, 1e-5);
    const auto path = lasso_path(y, X, f, grid);
    const LassoSolution& last = path.back();
    ASSERT_EQ(last.active.size(), 6u) << f.name();
    const PartialFit mle = fit_subset(y, X, last.active, f);
    EXPECT_LE((last.beta - mle.beta).lpNorm<Eigen::Infinity>(), 1e-3) << f.name();
  }
}

TEST(Lasso, EveryReportedSolutionSatisfiesKkt) {
  for (const Family f : {Family::gaussian(), Family::binomial(), Family::poisson()}) {
    const Matrix X = centered(normal_matrix(120, 200, Stream(47)));
    Vector beta = Vector::Zero(201);
    beta[1] = 0.8;
    beta[50] = -0.6;
    beta[77] = 0.5;
    const Vector y = draw_response(X, beta, f, Stream(48));
    LassoOptions options;
    options.max_active = 60;
    const auto path = lasso_path(y, X, f, lambda_grid(lambda_max(y, X, f)), options);
    ASSERT_GT(path.size(), 10u);
    for (const LassoSolution& s : path) {
      EXPECT_TRUE(s.converged) << f.name() << " lambda=" << s.lambda;
      EXPECT_LE(kkt_violation(y, X, f, s.beta, s.lambda), 1e-4)
          << f.name() << " lambda=" << s.lambda;
    }
  }
}

TEST(Lasso, PathRejectsBadGrids) {
  const Matrix X = normal_matrix(20, 3, Stream(49));
  const Vector y = Vector::Zero(20);
  EXPECT_THROW(lasso_path(y, X, Family::gaussian(), {1.0, 1.0}), Error);
  EXPECT_THROW(lasso_path(y, X, Family::gaussian(), {1.0, -0.5}), Error);
  EXPECT_THROW(lasso_path(Vector::Zero(19), X, Family::gaussian(), {1.0}), Error);
}

TEST(CvSelect, DeterministicGivenTheSeed) {
  const Matrix X = centered(normal_matrix(100, 80, Stream(50)));
  Vector beta = Vector::Zero(81);
  beta[4] = 1.0;
  beta[9] = -0.8;
  const Vector y = draw_response(X, beta, Family::binomial(), Stream(51));
  CvOptions options;
  options.n_lambda = 40;
  const SelectionResult a = cv_select(y, X, Family::binomial(), Stream(5), options);
  const SelectionResult b = cv_select(y, X, Family::binomial(), Stream(5), options);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(*a.lambda, *b.lambda);
  EXPECT_TRUE(std::is_sorted(a.selected.begin(), a.selected.end()));
  EXPECT_TRUE(contains(a.selected, 3));
  EXPECT_TRUE(contains(a.selected, 8));
}

TEST(CvSelect, NullResponseGivesEmptySelection) {
  const Matrix X = centered(normal_matrix(60, 10, Stream(52)));
  const SelectionResult r = cv_select(Vector::Constant(60, 2.0), X, Family::poisson(), Stream(1));
  EXPECT_TRUE(r.selected.empty());
}

TEST(CvSelect, LargeSelectionsAreCappedAtHalfTheRows) {
  const Matrix X = centered(normal_matrix(40, 60, Stream(53)));
  Vector beta = Vector::Zero(61);
  for (Index j = 1; j <= 60; ++j) beta[j] = 0.5 * ((j % 2) ? 1.0 : -1.0);
  const Vector y = draw_response(X, beta, Family::gaussian(), Stream(54));
  CvOptions options;
  options.folds = 5;
  options.lasso.max_active = 60;
  const SelectionResult r = cv_select(y, X, Family::gaussian(), Stream(2), options);
  EXPECT_LE(r.selected.size(), 20u);
}

TEST(CvSelect, RejectsBadFoldCounts) {
  const Matrix X = normal_matrix(10, 3, Stream(55));
  CvOptions options;
  options.folds = 1;
  EXPECT_THROW(cv_select(Vector::Zero(10), X, Family::gaussian(), Stream(1), options), Error);
}

TEST(Selector, FactoryBuildsKnownKinds) {
  SelectorSpec spec;
  EXPECT_EQ(make_selector(spec)->name(), "sis");
  spec.kind = "lasso-cv";
  EXPECT_EQ(make_selector(spec)->name(), "lasso-cv");
  spec.kind = "scad";
  EXPECT_THROW(make_selector(spec), Error);
}

}  // namespace
}  // namespace ssglm
