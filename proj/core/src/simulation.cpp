#include "ssglm/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "ssglm/error.hpp"
#include "ssglm/parallel.hpp"
#include "ssglm/split_smooth.hpp"

namespace ssglm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Stream replication_stream(std::uint64_t seed, Index k) {
  return Stream(seed).substream("replication").substream(static_cast<std::uint64_t>(k));
}

double rate_mcse(double rate, double trials) {
  return trials > 0 ? std::sqrt(std::max(rate * (1.0 - rate), 0.0) / trials) : kNaN;
}

/// Mean of the finite entries of a column.
double finite_mean(const Eigen::Ref<const Vector>& v) {
  double s = 0;
  Index c = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      s += v[i];
      ++c;
    }
  }
  return c > 0 ? s / static_cast<double>(c) : kNaN;
}

}  // namespace

Family SimScenario::family() const {
  if (!fit_family.empty()) return Family::from_name(fit_family);
  if (response == "negative_binomial") return Family::poisson();
  return Family::from_name(response);
}

// ---------------------------------------------------------------------------
// Presets

namespace scenarios {

namespace {

/// Screening size n2 / (4 log n2) for logistic presets. With the default
/// n2 / log n2 the refits on the estimation half are routinely separable.
Index logistic_screening_cap(Index n, double q) {
  const auto n2 = static_cast<double>(n - static_cast<Index>(std::llround(q * static_cast<double>(n))));
  return std::max<Index>(1, static_cast<Index>(std::floor(n2 / (4.0 * std::log(n2)))));
}

}  // namespace

SimScenario table1() {
  SimScenario s;
  s.name = "table1";
  s.response = "poisson";
  s.n = 300;
  s.p = 400;
  s.beta.kind = BetaSpec::Kind::fixed;
  s.beta.indices = {12, 71, 351, 377, 386};
  s.beta.values = {0.4, 0.6, 0.8, 1.0, 1.2};
  s.B = 100;
  s.K = 100;
  s.selector.kind = "lasso-cv";
  s.seed = 2001;
  return s;
}

SimScenario table2(CorrelationSpec correlation) {
  SimScenario s;
  s.name = "table2";
  s.response = "poisson";
  s.n = 400;
  s.p = 500;
  s.beta.kind = BetaSpec::Kind::fixed;
  s.beta.indices = {74, 109, 347, 358, 379, 438};
  s.beta.values = {0.810, 0.595, 0.545, 0.560, 0.665, 0.985};
  s.beta.intercept = 1.0;
  s.correlation = correlation;
  s.B = 100;
  s.K = 100;
  s.selector.kind = "sis";
  s.seed = 2002;
  return s;
}

SimScenario example1(double q) {
  SimScenario s;
  s.name = "example1";
  s.response = "gaussian";
  s.n = 500;
  s.p = 1000;
  s.beta.kind = BetaSpec::Kind::random;
  s.beta.s0 = 10;
  s.beta.low = 0.5;
  s.beta.high = 1.5;
  s.q = q;
  s.B = 100;
  s.K = 20;
  s.selector.kind = "sis";
  s.seed = 2003;
  return s;
}

SimScenario example4(CorrelationSpec correlation) {
  SimScenario s;
  s.name = "example4";
  s.response = "binomial";
  s.n = 400;
  s.p = 500;
  s.beta.kind = BetaSpec::Kind::fixed;
  s.beta.indices = {218, 242, 269, 417};
  s.beta.values = {-2.0, -1.0, 1.0, 2.0};
  s.correlation = correlation;
  s.B = 100;
  s.K = 50;
  s.selector.kind = "sis";
  s.selector.sis_cap = logistic_screening_cap(s.n, s.q);
  s.seed = 2004;
  return s;
}

SimScenario table5(double rho) {
  SimScenario s;
  s.name = "table5";
  s.response = "binomial";
  s.n = 200;
  s.p = 300;
  s.beta.kind = BetaSpec::Kind::fixed;
  s.beta.indices = {10, 20, 30};
  s.beta.values = {2.0, -2.0, 2.0};
  s.correlation = {CorrelationSpec::Kind::ar1, rho};
  s.B = 100;
  s.K = 60;
  s.selector.kind = "sis";
  s.selector.sis_cap = logistic_screening_cap(s.n, s.q);
  s.seed = 2005;
  return s;
}

SimScenario appendix_b1() {
  SimScenario s;
  s.name = "appendix_b1";
  s.response = "negative_binomial";
  s.nb_dispersion = 10.0;
  s.fit_family = "poisson";
  s.n = 300;
  s.p = 500;
  s.beta.kind = BetaSpec::Kind::fixed;
  s.beta.indices = {90, 179, 206, 237, 316};
  s.beta.values = {-1.0, -0.5, 0.5, 1.0, 1.5};
  s.B = 300;
  s.K = 50;
  s.selector.kind = "sis";
  s.seed = 2006;
  return s;
}

SimScenario appendix_b2() {
  SimScenario s;
  s.name = "appendix_b2";
  s.response = "poisson";
  s.n = 300;
  s.p = 500;
  s.beta.kind = BetaSpec::Kind::nonsparse;
  s.beta.indices = {128, 256, 381, 497};
  s.beta.values = {-1.5, -1.0, 1.0, 1.5};
  s.beta.dense_count = 96;
  s.beta.dense_half_width = 0.5;
  s.B = 100;
  s.K = 50;
  s.selector.kind = "sis";
  s.seed = 2007;
  return s;
}

std::vector<std::string> names() {
  return {"table1",       "table2-identity", "table2-ar1",  "table2-cs",   "example1",
          "example4-identity", "example4-ar1", "example4-cs", "table5-0.25", "table5-0.4",
          "table5-0.6",   "table5-0.75",     "appendix_b1", "appendix_b2"};
}

SimScenario by_name(const std::string& name) {
  const CorrelationSpec ar1{CorrelationSpec::Kind::ar1, 0.5};
  const CorrelationSpec cs{CorrelationSpec::Kind::cs, 0.5};
  SimScenario s;
  if (name == "table1") {
    s = table1();
  } else if (name == "table2-identity") {
    s = table2();
  } else if (name == "table2-ar1") {
    s = table2(ar1);
  } else if (name == "table2-cs") {
    s = table2(cs);
  } else if (name == "example1") {
    s = example1();
  } else if (name == "example4-identity") {
    s = example4();
  } else if (name == "example4-ar1") {
    s = example4(ar1);
  } else if (name == "example4-cs") {
    s = example4(cs);
  } else if (name.rfind("table5-", 0) == 0) {
    const std::string rho = name.substr(7);
    if (rho != "0.25" && rho != "0.4" && rho != "0.6" && rho != "0.75") {
      throw Error(ErrorCode::scenario_error, "unknown preset '" + name + "'");
    }
    s = table5(std::stod(rho));
  } else if (name == "appendix_b1") {
    s = appendix_b1();
  } else if (name == "appendix_b2") {
    s = appendix_b2();
  } else {
    throw Error(ErrorCode::scenario_error, "unknown preset '" + name + "'");
  }
  s.name = name;
  return s;
}

}  // namespace scenarios

// ---------------------------------------------------------------------------
// Generators

Matrix gen_design(Index n, Index p, const CorrelationSpec& correlation, Stream stream) {
  if (n < 1 || p < 1) throw Error(ErrorCode::scenario_error, "gen_design: empty dimensions");
  const double rho = correlation.rho;
  if (correlation.kind != CorrelationSpec::Kind::identity && !(rho > -1.0 && rho < 1.0)) {
    throw Error(ErrorCode::scenario_error, "gen_design: rho must lie in (-1, 1)");
  }
  std::normal_distribution<double> normal;
  Matrix Z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) Z(i, j) = normal(stream);
  }

  Matrix X;
  switch (correlation.kind) {
    case CorrelationSpec::Kind::identity:
      X = std::move(Z);
      break;
    case CorrelationSpec::Kind::ar1: {
      // The Cholesky factor of rho^|i-j| is lower bidiagonal in its inverse,
      // which turns X = Z L^T into a first-order recursion.
      X.resize(n, p);
      const double scale = std::sqrt(1.0 - rho * rho);
      X.col(0) = Z.col(0);
      for (Index j = 1; j < p; ++j) X.col(j) = rho * X.col(j - 1) + scale * Z.col(j);
      break;
    }
    case CorrelationSpec::Kind::cs: {
      if (!(rho > -1.0 / static_cast<double>(std::max<Index>(p - 1, 1)))) {
        throw Error(ErrorCode::scenario_error,
                    "gen_design: compound symmetry is not positive definite for this rho");
      }
      Matrix sigma = Matrix::Constant(p, p, rho);
      sigma.diagonal().setOnes();
      const Eigen::LLT<Matrix> llt(sigma);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::scenario_error, "gen_design: correlation matrix not positive definite");
      }
      X = Z * llt.matrixL().transpose();
      break;
    }
  }
  X.rowwise() -= X.colwise().mean();
  return X;
}

Truth gen_truth(Index p, const BetaSpec& spec, Stream stream) {
  Truth t;
  t.beta = Vector::Zero(p + 1);
  t.beta[0] = spec.intercept;
  auto place = [&](Index idx, double value) {
    if (idx < 1 || idx > p) {
      throw Error(ErrorCode::scenario_error, "gen_truth: index " + std::to_string(idx) +
                                                 " outside 1.." + std::to_string(p));
    }
    t.beta[idx] = value;
  };
  switch (spec.kind) {
    case BetaSpec::Kind::fixed:
      for (std::size_t k = 0; k < spec.indices.size(); ++k) place(spec.indices[k], spec.values.at(k));
      break;
    case BetaSpec::Kind::random: {
      Stream idx_stream = stream.substream("indices");
      Stream val_stream = stream.substream("values");
      for (const auto c : sample_without_replacement(p, spec.s0, idx_stream)) {
        const double mag = spec.low + (spec.high - spec.low) * val_stream.uniform();
        place(c + 1, val_stream.uniform() < 0.5 ? -mag : mag);
      }
      break;
    }
    case BetaSpec::Kind::nonsparse: {
      for (std::size_t k = 0; k < spec.indices.size(); ++k) place(spec.indices[k], spec.values.at(k));
      std::vector<Index> free;
      for (Index j = 1; j <= p; ++j) {
        if (std::find(spec.indices.begin(), spec.indices.end(), j) == spec.indices.end()) {
          free.push_back(j);
        }
      }
      Stream idx_stream = stream.substream("indices");
      Stream val_stream = stream.substream("values");
      const auto picks = sample_without_replacement(static_cast<std::int64_t>(free.size()),
                                                    spec.dense_count, idx_stream);
      for (const auto k : picks) {
        const double w = spec.dense_half_width;
        double v = 0.0;
        while (v == 0.0) v = -w + 2.0 * w * val_stream.uniform();
        place(free[static_cast<std::size_t>(k)], v);
      }
      break;
    }
  }
  for (Index j = 1; j <= p; ++j) {
    if (t.beta[j] != 0.0) t.support.push_back(j);
  }
  return t;
}

Vector gen_response(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& beta,
                    const std::string& response, double nb_dispersion, Stream stream) {
  if (beta.size() != X.cols() + 1) {
    throw Error(ErrorCode::dimension_mismatch, "gen_response: beta must have p + 1 entries");
  }
  const Vector eta = (X * beta.tail(X.cols())).array() + beta[0];
  const Index n = X.rows();
  Vector y(n);
  auto mean_of = [&](Index i) {
    const double mu = std::exp(eta[i]);
    if (!std::isfinite(mu) || mu > 1e15) {
      throw Error(ErrorCode::non_finite_value,
                  "gen_response: mean overflows for row " + std::to_string(i + 1));
    }
    return mu;
  };
  if (response == "gaussian") {
    std::normal_distribution<double> normal;
    for (Index i = 0; i < n; ++i) y[i] = eta[i] + normal(stream);
  } else if (response == "binomial") {
    for (Index i = 0; i < n; ++i) {
      const double pr = 1.0 / (1.0 + std::exp(-eta[i]));
      y[i] = stream.uniform() < pr ? 1.0 : 0.0;
    }
  } else if (response == "poisson") {
    for (Index i = 0; i < n; ++i) {
      std::poisson_distribution<long long> pois(mean_of(i));
      y[i] = static_cast<double>(pois(stream));
    }
  } else if (response == "negative_binomial") {
    if (!(nb_dispersion > 0.0)) {
      throw Error(ErrorCode::scenario_error, "gen_response: dispersion must be positive");
    }
    for (Index i = 0; i < n; ++i) {
      const double mu = mean_of(i);
      std::gamma_distribution<double> gamma(nb_dispersion, mu / nb_dispersion);
      const double lambda = gamma(stream);
      std::poisson_distribution<long long> pois(std::max(lambda, 1e-300));
      y[i] = static_cast<double>(pois(stream));
    }
  } else {
    throw Error(ErrorCode::scenario_error, "gen_response: unknown response '" + response + "'");
  }
  return y;
}

double auc(const Eigen::Ref<const Vector>& labels, const Eigen::Ref<const Vector>& score) {
  const Index n = labels.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return score[a] < score[b]; });
  // Mann-Whitney statistic with mid-ranks for ties.
  double rank_sum = 0;
  double positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t k = i;
    while (k + 1 < order.size() && score[order[k + 1]] == score[order[i]]) ++k;
    const double mid = 0.5 * static_cast<double>(i + k) + 1.0;
    for (std::size_t m = i; m <= k; ++m) {
      if (labels[order[m]] == 1.0) {
        rank_sum += mid;
        positives += 1.0;
      }
    }
    i = k + 1;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0 || negatives == 0) return kNaN;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

// ---------------------------------------------------------------------------
// Replication engine

namespace {

struct Replicate {
  bool ok = false;
  std::string error;
  Vector estimate;
  Vector se;
  Vector p_value;
  Vector lower;
  Vector upper;
  Vector sel;
  double auc = kNaN;
  double seconds = 0;
};

Replicate run_one(const SimScenario& s, const Truth& truth, const Family& family,
                  const Selector& selector, Index k) {
  Replicate r;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Stream rep = replication_stream(s.seed, k);
    const Matrix X = gen_design(s.n, s.p, s.correlation, rep.substream("design"));
    const Vector y = gen_response(X, truth.beta, s.response, s.nb_dispersion, rep.substream("response"));
    SsglmOptions opt;
    opt.q = s.q;
    opt.B = s.B;
    opt.seed = rep.substream("splits").key();
    opt.threads = 1;
    const SmoothedFit fit = ssglm_fit(y, X, family, selector, opt);
    const InferenceReport inf = infer(fit, s.alpha);
    r.estimate = inf.beta_hat;
    r.se = inf.se;
    r.p_value = inf.p_values;
    r.lower = inf.ci_lower;
    r.upper = inf.ci_upper;
    r.sel = fit.selection_freq;
    if (family.kind() == FamilyKind::binomial_logit) {
      const Matrix Xh = gen_design(s.n, s.p, s.correlation, rep.substream("holdout-design"));
      const Vector yh =
          gen_response(Xh, truth.beta, s.response, s.nb_dispersion, rep.substream("holdout-response"));
      const Vector b = inf.beta_hat.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
      const Vector score = (Xh * b.tail(s.p)).array() + b[0];
      r.auc = auc(yh, score);
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

MetricsReport run_scenario(const SimScenario& s) {
  validate_scenario(s);
  const Family family = s.family();
  const auto selector = make_selector(s.selector);
  const Truth truth = gen_truth(s.p, s.beta, Stream(s.seed).substream("truth"));

  std::vector<Replicate> reps(static_cast<std::size_t>(s.K));
  parallel_for(s.K, s.threads, [&](std::ptrdiff_t k) {
    reps[static_cast<std::size_t>(k)] = run_one(s, truth, family, *selector, k);
  });

  MetricsReport m;
  m.scenario = s;
  m.beta_star = truth.beta;
  m.support = truth.support;
  const Index m1 = s.p + 1;
  for (Index k = 0; k < s.K; ++k) {
    const Replicate& r = reps[static_cast<std::size_t>(k)];
    if (r.ok) {
      ++m.K_effective;
    } else {
      m.failures.push_back("replication " + std::to_string(k) + ": " + r.error);
    }
  }
  const Index K = m.K_effective;
  m.estimates.resize(K, m1);
  m.std_errors.resize(K, m1);
  m.p_values.resize(K, m1);
  m.covered.resize(K, m1);
  m.selected_freq.resize(K, s.p);
  m.auc.resize(K);
  m.seconds.resize(s.K);
  Index row = 0;
  for (Index k = 0; k < s.K; ++k) {
    const Replicate& r = reps[static_cast<std::size_t>(k)];
    m.seconds[k] = r.seconds;
    if (!r.ok) continue;
    m.estimates.row(row) = r.estimate.transpose();
    m.std_errors.row(row) = r.se.transpose();
    m.p_values.row(row) = r.p_value.transpose();
    for (Index j = 0; j < m1; ++j) {
      const double b = truth.beta[j];
      m.covered(row, j) = std::isfinite(r.lower[j])
                              ? ((r.lower[j] <= b && b <= r.upper[j]) ? 1.0 : 0.0)
                              : kNaN;
    }
    m.selected_freq.row(row) = r.sel.transpose();
    m.auc[row] = r.auc;
    ++row;
  }

  m.bias.resize(m1);
  m.mean_se.resize(m1);
  m.sd.resize(m1);
  m.coverage.resize(m1);
  m.coverage_mcse.resize(m1);
  m.rejection.resize(m1);
  m.rejection_mcse.resize(m1);
  m.mse.resize(m1);
  m.sel_freq = Vector::Constant(m1, kNaN);
  const auto Kd = static_cast<double>(K);
  for (Index j = 0; j < m1; ++j) {
    if (K == 0) {
      m.bias[j] = m.mean_se[j] = m.sd[j] = m.coverage[j] = m.coverage_mcse[j] = kNaN;
      m.rejection[j] = m.rejection_mcse[j] = m.mse[j] = kNaN;
      continue;
    }
    const Vector est = m.estimates.col(j);
    const double mean = est.mean();
    m.bias[j] = mean - truth.beta[j];
    m.mean_se[j] = finite_mean(m.std_errors.col(j));
    m.sd[j] = K > 1 ? std::sqrt((est.array() - mean).square().sum() / (Kd - 1.0)) : 0.0;
    m.mse[j] = (est.array() - truth.beta[j]).square().mean();
    m.coverage[j] = finite_mean(m.covered.col(j));
    m.coverage_mcse[j] = rate_mcse(m.coverage[j], Kd);
    double rejected = 0;
    double tested = 0;
    for (Index k = 0; k < K; ++k) {
      const double pv = m.p_values(k, j);
      if (!std::isfinite(pv)) continue;
      tested += 1;
      if (pv < s.alpha) rejected += 1;
    }
    m.rejection[j] = tested > 0 ? rejected / tested : kNaN;
    m.rejection_mcse[j] = rate_mcse(m.rejection[j], tested);
    if (j > 0) m.sel_freq[j] = m.selected_freq.col(j - 1).mean();
  }

  m.mse_avg = K > 0 ? m.mse.tail(s.p).mean() : kNaN;
  std::vector<Index> noise;
  for (Index j = 1; j <= s.p; ++j) {
    if (truth.beta[j] == 0.0) noise.push_back(j);
  }
  auto noise_mean = [&](const Vector& v) {
    if (noise.empty()) return kNaN;
    double sum = 0;
    for (const Index j : noise) sum += v[j];
    return sum / static_cast<double>(noise.size());
  };
  m.noise_bias = noise_mean(m.bias);
  m.noise_se = noise_mean(m.mean_se);
  m.noise_sd = noise_mean(m.sd);
  m.noise_coverage = noise_mean(m.coverage);
  m.noise_rejection = noise_mean(m.rejection);
  // Treats noise coordinates as independent trials, which understates the
  // error when their tests are correlated.
  m.noise_rejection_mcse =
      rate_mcse(m.noise_rejection, Kd * static_cast<double>(noise.size()));
  m.noise_sel_freq = noise_mean(m.sel_freq);
  m.mean_auc = family.kind() == FamilyKind::binomial_logit && K > 0 ? finite_mean(m.auc) : kNaN;
  return m;
}

std::vector<QSweepPoint> q_sweep(const SimScenario& scenario, const std::vector<double>& qs) {
  std::vector<QSweepPoint> out;
  for (const double q : qs) {
    SimScenario s = scenario;
    s.q = q;
    const MetricsReport m = run_scenario(s);
    out.push_back({q, m.mse_avg, m.K_effective});
  }
  return out;
}

ContrastReport contrast_scenario(const SimScenario& s, const IndexSet& subset,
                                 const std::vector<Contrast>& contrasts) {
  validate_scenario(s);
  const auto p1 = static_cast<Index>(subset.size());
  if (p1 == 0) throw Error(ErrorCode::scenario_error, "contrast_scenario: empty subset");
  IndexSet S1;
  for (const Index j : subset) {
    if (j < 1 || j > s.p) {
      throw Error(ErrorCode::scenario_error,
                  "contrast_scenario: subset index " + std::to_string(j) + " outside 1..p");
    }
    S1.push_back(j - 1);
  }
  for (const Contrast& c : contrasts) {
    if (c.Q.cols() != p1 || c.Q.rows() != c.R.size() || c.Q.rows() == 0) {
      throw Error(ErrorCode::scenario_error, "contrast '" + c.name + "' has inconsistent Q/R");
    }
  }
  const Family family = s.family();
  const auto selector = make_selector(s.selector);
  const Truth truth = gen_truth(s.p, s.beta, Stream(s.seed).substream("truth"));

  struct Rep {
    bool ok = false;
    std::string error;
    Vector beta1;
    Matrix sigma1;
    std::vector<double> p_values;
  };
  std::vector<Rep> reps(static_cast<std::size_t>(s.K));
  parallel_for(s.K, s.threads, [&](std::ptrdiff_t kk) {
    const auto k = static_cast<Index>(kk);
    Rep& r = reps[static_cast<std::size_t>(k)];
    try {
      const Stream rep = replication_stream(s.seed, k);
      const Matrix X = gen_design(s.n, s.p, s.correlation, rep.substream("design"));
      const Vector y =
          gen_response(X, truth.beta, s.response, s.nb_dispersion, rep.substream("response"));
      SsglmOptions opt;
      opt.q = s.q;
      opt.B = s.B;
      opt.seed = rep.substream("splits").key();
      const SubvectorFit fit = subvector_fit(y, X, family, *selector, S1, opt);
      r.beta1 = fit.beta1_hat;
      r.sigma1 = subvector_covariance(fit);
      for (const Contrast& c : contrasts) {
        r.p_values.push_back(contrast_test(r.beta1, r.sigma1, c.Q, c.R).p_value);
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  ContrastReport out;
  out.scenario = s;
  out.subset = subset;
  out.contrasts = contrasts;
  out.truth.resize(p1);
  for (Index k = 0; k < p1; ++k) out.truth[k] = truth.beta[subset[static_cast<std::size_t>(k)]];
  out.mean_beta1 = Vector::Zero(p1);
  out.mean_sigma1 = Matrix::Zero(p1, p1);
  const auto nc = static_cast<Index>(contrasts.size());
  out.rejection = Vector::Zero(nc);
  std::vector<Vector> estimates;
  for (Index k = 0; k < s.K; ++k) {
    const Rep& r = reps[static_cast<std::size_t>(k)];
    if (!r.ok) {
      out.failures.push_back("replication " + std::to_string(k) + ": " + r.error);
      continue;
    }
    ++out.K_effective;
    out.mean_beta1 += r.beta1;
    out.mean_sigma1 += r.sigma1;
    estimates.push_back(r.beta1);
    for (Index c = 0; c < nc; ++c) {
      if (r.p_values[static_cast<std::size_t>(c)] < s.alpha) out.rejection[c] += 1.0;
    }
  }
  const auto K = static_cast<double>(out.K_effective);
  out.rejection_mcse.resize(nc);
  if (out.K_effective > 0) {
    out.mean_beta1 /= K;
    out.mean_sigma1 /= K;
    out.rejection /= K;
  } else {
    out.mean_beta1.setConstant(kNaN);
    out.mean_sigma1.setConstant(kNaN);
    out.rejection.setConstant(kNaN);
  }
  for (Index c = 0; c < nc; ++c) out.rejection_mcse[c] = rate_mcse(out.rejection[c], K);
  out.empirical_sigma1 = Matrix::Zero(p1, p1);
  if (out.K_effective > 1) {
    for (const Vector& e : estimates) {
      const Vector d = e - out.mean_beta1;
      out.empirical_sigma1 += d * d.transpose();
    }
    out.empirical_sigma1 /= K - 1.0;
  }
  for (const Contrast& c : contrasts) {
    out.true_value.push_back((c.Q * out.truth - c.R)[0]);
  }
  return out;
}

}  // namespace ssglm
