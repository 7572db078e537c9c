#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ssglm/error.hpp"
#include "ssglm/simulation.hpp"

namespace ssglm {
namespace {

Matrix sample_covariance(const Matrix& X) {
  const Matrix C = X.rowwise() - X.colwise().mean();
  return C.transpose() * C / static_cast<double>(X.rows() - 1);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

TEST(Scenario, JsonRoundTrip) {
  SimScenario s = scenarios::appendix_b2();
  s.threads = 3;
  s.selector.sis_cap = 17;
  nlohmann::json j = s;
  const SimScenario back = j.get<SimScenario>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.beta.dense_count, 96);
  EXPECT_EQ(back.selector.sis_cap, 17);

  const auto path = std::filesystem::temp_directory_path() / "ssglm_scenario_roundtrip.json";
  save_scenario(path.string(), s);
  EXPECT_EQ(nlohmann::json(load_scenario(path.string())), j);
  std::filesystem::remove(path);
}

TEST(Scenario, RejectsUnknownKeysAndBadValues) {
  nlohmann::json j = scenarios::table1();
  j["colour"] = "red";
  EXPECT_EQ(code_of([&] { (void)j.get<SimScenario>(); }), ErrorCode::scenario_error);
  j = scenarios::table1();
  j["beta"]["sign"] = 1;
  EXPECT_EQ(code_of([&] { (void)j.get<SimScenario>(); }), ErrorCode::scenario_error);
  j = scenarios::table1();
  j["n"] = "three hundred";
  EXPECT_EQ(code_of([&] { (void)j.get<SimScenario>(); }), ErrorCode::scenario_error);

  SimScenario s = scenarios::table1();
  s.q = 1.0;
  EXPECT_EQ(code_of([&] { validate_scenario(s); }), ErrorCode::scenario_error);
  s = scenarios::table1();
  s.response = "gamma";
  EXPECT_EQ(code_of([&] { validate_scenario(s); }), ErrorCode::scenario_error);
  s = scenarios::table1();
  s.beta.indices.push_back(401);
  s.beta.values.push_back(1.0);
  EXPECT_EQ(code_of([&] { validate_scenario(s); }), ErrorCode::scenario_error);
}

TEST(Scenario, EveryPresetIsValid) {
  for (const auto& name : scenarios::names()) {
    const SimScenario s = scenarios::by_name(name);
    EXPECT_EQ(s.name, name);
    EXPECT_NO_THROW(validate_scenario(s)) << name;
  }
  EXPECT_EQ(code_of([] { (void)scenarios::by_name("table9"); }), ErrorCode::scenario_error);
  EXPECT_EQ(scenarios::by_name("table5-0.6").correlation.rho, 0.6);
  EXPECT_EQ(scenarios::appendix_b1().family().kind(), FamilyKind::poisson);
}

TEST(Scenario, LogisticPresetsScreenFewerColumns) {
  // floor(200 / (4 log 200)) = 9 and floor(100 / (4 log 100)) = 5
  EXPECT_EQ(scenarios::example4().selector.sis_cap, 9);
  EXPECT_EQ(scenarios::table5().selector.sis_cap, 5);
  EXPECT_EQ(scenarios::table5().selector.kind, "sis");
  EXPECT_EQ(scenarios::table2().selector.sis_cap, 0);
  EXPECT_EQ(scenarios::appendix_b1().selector.sis_cap, 0);
}

TEST(GenDesign, IdentityMoments) {
  const Matrix X = gen_design(5000, 10, {}, Stream(1));
  EXPECT_LE(X.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((sample_covariance(X) - Matrix::Identity(10, 10)).lpNorm<Eigen::Infinity>(), 0.1);
}

TEST(GenDesign, Ar1Moments) {
  const Matrix C = sample_covariance(gen_design(20000, 6, {CorrelationSpec::Kind::ar1, 0.5}, Stream(2)));
  EXPECT_NEAR(C(0, 1), 0.5, 0.03);
  EXPECT_NEAR(C(0, 2), 0.25, 0.03);
  EXPECT_NEAR(C(2, 5), 0.125, 0.03);
  EXPECT_NEAR(C(5, 5), 1.0, 0.05);
}

TEST(GenDesign, CompoundSymmetryMoments) {
  const Matrix C = sample_covariance(gen_design(20000, 6, {CorrelationSpec::Kind::cs, 0.5}, Stream(3)));
  EXPECT_NEAR(C(0, 5), 0.5, 0.03);
  EXPECT_NEAR(C(2, 3), 0.5, 0.03);
  EXPECT_NEAR(C(4, 4), 1.0, 0.05);
  const Matrix N = sample_covariance(gen_design(20000, 4, {CorrelationSpec::Kind::cs, -0.2}, Stream(4)));
  EXPECT_NEAR(N(0, 3), -0.2, 0.03);
}

TEST(GenDesign, InvalidCorrelationsAreRejected) {
  // compound symmetry needs rho > -1 / (p - 1)
  EXPECT_EQ(code_of([] { (void)gen_design(10, 10, {CorrelationSpec::Kind::cs, -1.0 / 9.0}, Stream(1)); }),
            ErrorCode::scenario_error);
  EXPECT_EQ(code_of([] { (void)gen_design(10, 10, {CorrelationSpec::Kind::cs, -0.2}, Stream(1)); }),
            ErrorCode::scenario_error);
  EXPECT_EQ(code_of([] { (void)gen_design(10, 3, {CorrelationSpec::Kind::ar1, 1.0}, Stream(1)); }),
            ErrorCode::scenario_error);
  EXPECT_NO_THROW((void)gen_design(10, 10, {CorrelationSpec::Kind::cs, -0.1}, Stream(1)));
}

TEST(GenDesign, Deterministic) {
  EXPECT_EQ(gen_design(30, 7, {CorrelationSpec::Kind::ar1, 0.3}, Stream(9)),
            gen_design(30, 7, {CorrelationSpec::Kind::ar1, 0.3}, Stream(9)));
}

TEST(GenTruth, FixedPresets) {
  const Truth t4 = gen_truth(500, scenarios::example4().beta, Stream(1));
  EXPECT_EQ(t4.support, (IndexSet{218, 242, 269, 417}));
  EXPECT_EQ(t4.beta[218], -2.0);
  EXPECT_EQ(t4.beta[417], 2.0);
  EXPECT_EQ(t4.beta[0], 0.0);

  const Truth t2 = gen_truth(500, scenarios::table2().beta, Stream(1));
  EXPECT_EQ(t2.beta[0], 1.0);
  EXPECT_EQ(t2.support, (IndexSet{74, 109, 347, 358, 379, 438}));
  EXPECT_DOUBLE_EQ(t2.beta[438], 0.985);
}

TEST(GenTruth, RandomSignals) {
  const BetaSpec spec = scenarios::example1().beta;
  const Truth t = gen_truth(1000, spec, Stream(7));
  ASSERT_EQ(t.support.size(), 10u);
  for (const Index j : t.support) {
    EXPECT_GE(std::abs(t.beta[j]), 0.5);
    EXPECT_LE(std::abs(t.beta[j]), 1.5);
  }
  EXPECT_EQ(gen_truth(1000, spec, Stream(7)).beta, t.beta);
  EXPECT_NE(gen_truth(1000, spec, Stream(8)).support, t.support);

  BetaSpec empty = spec;
  empty.s0 = 0;
  const Truth none = gen_truth(1000, empty, Stream(7));
  EXPECT_TRUE(none.support.empty());
  EXPECT_EQ(none.beta, Vector::Zero(1001));
}

TEST(GenTruth, NonSparseTruth) {
  const BetaSpec spec = scenarios::appendix_b2().beta;
  const Truth t = gen_truth(500, spec, Stream(3));
  EXPECT_EQ(t.support.size(), 100u);
  EXPECT_EQ(t.beta[128], -1.5);
  EXPECT_EQ(t.beta[497], 1.5);
  Index small = 0;
  for (const Index j : t.support) {
    if (j == 128 || j == 256 || j == 381 || j == 497) continue;
    EXPECT_LE(std::abs(t.beta[j]), 0.5);
    ++small;
  }
  EXPECT_EQ(small, 96);
}

TEST(GenResponse, BinomialWithZeroSlopesIsAFairCoin) {
  const Matrix X = gen_design(10000, 3, {}, Stream(1));
  const Vector y = gen_response(X, Vector::Zero(4), "binomial", 0, Stream(2));
  EXPECT_NEAR(y.mean(), 0.5, 0.02);
  EXPECT_TRUE((y.array() == 0.0 || y.array() == 1.0).all());
}

TEST(GenResponse, PoissonInterceptSetsTheMean) {
  const Vector y = gen_response(Matrix::Zero(10000, 1), Vector{{1.0, 0.0}}, "poisson", 0, Stream(3));
  EXPECT_NEAR(y.mean() / std::exp(1.0), 1.0, 0.03);
}

TEST(GenResponse, NegativeBinomialIsOverdispersed) {
  const double r = 10.0;
  const Vector y =
      gen_response(Matrix::Zero(40000, 1), Vector{{1.0, 0.0}}, "negative_binomial", r, Stream(4));
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
  const double mu = std::exp(1.0);
  EXPECT_NEAR(mean / mu, 1.0, 0.03);
  EXPECT_NEAR(var / mean, 1.0 + mu / r, 0.05);
}

TEST(GenResponse, GaussianNoiseHasUnitVariance) {
  const Vector y = gen_response(Matrix::Zero(20000, 1), Vector{{2.0, 0.0}}, "gaussian", 0, Stream(5));
  EXPECT_NEAR(y.mean(), 2.0, 0.03);
  EXPECT_NEAR((y.array() - y.mean()).square().mean(), 1.0, 0.04);
}

TEST(GenResponse, OverflowAndBadNamesAreReported) {
  EXPECT_EQ(code_of([] { (void)gen_response(Matrix::Zero(2, 1), Vector{{800.0, 0.0}}, "poisson", 0, Stream(1)); }),
            ErrorCode::non_finite_value);
  EXPECT_EQ(code_of([] { (void)gen_response(Matrix::Zero(2, 1), Vector{{0.0, 0.0}}, "gamma", 0, Stream(1)); }),
            ErrorCode::scenario_error);
  EXPECT_EQ(code_of([] { (void)gen_response(Matrix::Zero(2, 1), Vector{{0.0}}, "poisson", 0, Stream(1)); }),
            ErrorCode::dimension_mismatch);
}

TEST(Auc, MatchesPairCounting) {
  EXPECT_DOUBLE_EQ(auc(Vector{{0, 0, 1, 1}}, Vector{{0.1, 0.2, 0.3, 0.4}}), 1.0);
  EXPECT_DOUBLE_EQ(auc(Vector{{1, 1, 0, 0}}, Vector{{0.1, 0.2, 0.3, 0.4}}), 0.0);
  EXPECT_DOUBLE_EQ(auc(Vector{{0, 1, 0, 1}}, Vector::Constant(4, 3.0)), 0.5);
  EXPECT_TRUE(std::isnan(auc(Vector::Ones(3), Vector{{1, 2, 3}})));

  Stream s(11);
  Vector labels(200), score(200);
  for (Index i = 0; i < 200; ++i) {
    labels[i] = s.uniform() < 0.4 ? 1.0 : 0.0;
    score[i] = std::floor(10.0 * s.uniform() + labels[i] * 3.0);  // many ties
  }
  double wins = 0, pairs = 0;
  for (Index a = 0; a < 200; ++a) {
    for (Index b = 0; b < 200; ++b) {
      if (labels[a] != 1.0 || labels[b] != 0.0) continue;
      pairs += 1;
      wins += score[a] > score[b] ? 1.0 : (score[a] == score[b] ? 0.5 : 0.0);
    }
  }
  EXPECT_NEAR(auc(labels, score), wins / pairs, 1e-12);
}

SimScenario small_scenario() {
  SimScenario s;
  s.name = "small";
  s.response = "poisson";
  s.n = 80;
  s.p = 20;
  s.beta.indices = {2, 9};
  s.beta.values = {0.6, -0.5};
  s.B = 12;
  s.K = 8;
  s.selector.kind = "sis";
  s.selector.sis_cap = 6;
  s.seed = 77;
  return s;
}

TEST(RunScenario, MetricsAreConsistent) {
  const SimScenario s = small_scenario();
  const MetricsReport m = run_scenario(s);
  ASSERT_EQ(m.K_effective, s.K);
  EXPECT_TRUE(m.failures.empty());
  EXPECT_EQ(m.support, (IndexSet{2, 9}));
  EXPECT_EQ(m.estimates.rows(), s.K);
  EXPECT_EQ(m.estimates.cols(), s.p + 1);
  EXPECT_EQ(m.selected_freq.cols(), s.p);
  EXPECT_TRUE(std::isnan(m.sel_freq[0]));
  EXPECT_TRUE(std::isnan(m.mean_auc));

  const double K = static_cast<double>(m.K_effective);
  for (Index j = 0; j <= s.p; ++j) {
    // MSE = bias^2 + SD^2 (K - 1) / K
    EXPECT_NEAR(m.mse[j], m.bias[j] * m.bias[j] + m.sd[j] * m.sd[j] * (K - 1.0) / K, 1e-10);
    EXPECT_GE(m.coverage[j], 0.0);
    EXPECT_LE(m.coverage[j], 1.0);
  }
  EXPECT_NEAR(m.mse_avg, m.mse.tail(s.p).mean(), 1e-15);
  double noise_cov = 0;
  for (Index j = 1; j <= s.p; ++j) {
    if (j != 2 && j != 9) noise_cov += m.coverage[j];
  }
  EXPECT_NEAR(m.noise_coverage, noise_cov / 18.0, 1e-12);
  EXPECT_GT(m.sel_freq[2], 0.9);
}

TEST(RunScenario, ReproducibleAcrossRunsAndThreads) {
  SimScenario s = small_scenario();
  s.K = 4;
  const MetricsReport a = run_scenario(s);
  s.threads = 3;
  const MetricsReport b = run_scenario(s);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.std_errors, b.std_errors);
  s.seed = 78;
  EXPECT_NE(run_scenario(s).estimates, a.estimates);
}

TEST(RunScenario, LogisticScenariosReportHoldoutAuc) {
  SimScenario s = small_scenario();
  s.response = "binomial";
  s.beta.values = {2.0, -2.0};
  s.K = 3;
  const MetricsReport m = run_scenario(s);
  ASSERT_EQ(m.K_effective, 3);
  EXPECT_GT(m.mean_auc, 0.75);
  EXPECT_LE(m.mean_auc, 1.0);
}

TEST(QSweep, SharesReplicationSeeds) {
  SimScenario s = small_scenario();
  s.K = 3;
  const auto points = q_sweep(s, {0.3, 0.5});
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].q, 0.3);
  EXPECT_EQ(points[1].K_effective, 3);
  s.q = 0.5;
  EXPECT_DOUBLE_EQ(points[1].mse_avg, run_scenario(s).mse_avg);
}

TEST(ContrastScenario, ReportsRatesAndTruth) {
  SimScenario s = small_scenario();
  s.response = "gaussian";
  s.beta.values = {1.0, -1.0};
  s.B = 100;
  s.K = 6;
  Contrast zero{"b9 = 0", Matrix::Identity(1, 1), Vector::Zero(1)};
  Contrast sum{"b2 + b9 = 0.1", Matrix::Ones(1, 2), Vector::Constant(1, 0.1)};
  Contrast one{"b9 = 0", Matrix{{0.0, 1.0}}, Vector::Zero(1)};
  const ContrastReport r = contrast_scenario(s, {2, 9}, {sum, one});
  EXPECT_EQ(r.K_effective, 6);
  EXPECT_EQ(r.truth, (Vector{{1.0, -1.0}}));
  EXPECT_NEAR(r.true_value[0], -0.1, 1e-15);
  EXPECT_NEAR(r.true_value[1], -1.0, 1e-15);
  EXPECT_GE(r.rejection[1], 5.0 / 6.0);
  EXPECT_EQ(r.mean_sigma1.rows(), 2);
  EXPECT_EQ(code_of([&] { (void)contrast_scenario(s, {2, 9}, {zero}); }), ErrorCode::scenario_error);
  EXPECT_EQ(code_of([&] { (void)contrast_scenario(s, {21}, {zero}); }), ErrorCode::scenario_error);
}

}  // namespace
}  // namespace ssglm
