#include "ssglm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ssglm/error.hpp"

namespace ssglm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

nlohmann::json vec_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      arr.push_back(v[i]);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

std::string coefficient_label(Index position, const std::vector<std::string>& labels) {
  if (position == 0) return "(Intercept)";
  const auto k = static_cast<std::size_t>(position - 1);
  return k < labels.size() ? labels[k] : "x" + std::to_string(position);
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::vector<ResultRow> result_table(const InferenceReport& report,
                                    const std::vector<std::string>& labels) {
  std::vector<ResultRow> rows;
  const Index m = report.beta_hat.size();
  for (Index j = 0; j < m; ++j) {
    ResultRow r;
    r.position = j;
    r.label = coefficient_label(j, labels);
    r.beta = report.beta_hat[j];
    r.se = report.se[j];
    r.t = report.z[j];
    r.p_value = report.p_values[j];
    r.adjusted = report.bonferroni[j];
    r.sel_freq = report.selection_freq[j];
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    const bool fa = std::isfinite(a.p_value);
    const bool fb = std::isfinite(b.p_value);
    if (fa != fb) return fa;
    return fa && a.p_value < b.p_value;
  });
  return rows;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  auto out = open_out(path);
  out << "label,beta_hat,se,t,p_value,adjusted_p,sel_freq\n";
  for (const ResultRow& r : rows) {
    out << r.label << ',' << format_number(r.beta) << ',' << format_number(r.se) << ','
        << format_number(r.t) << ',' << format_number(r.p_value) << ','
        << format_number(r.adjusted) << ',' << format_number(r.sel_freq) << '\n';
  }
  finish(out, path);
}

void write_fit_json(const std::string& path, const SmoothedFit& fit, const InferenceReport& report,
                    const VarianceEstimate& variance, const std::vector<std::string>& labels) {
  using nlohmann::json;
  json j;
  j["family"] = std::string(fit.family.name());
  auto names = json::array();
  for (Index k = 0; k < fit.beta_hat.size(); ++k) names.push_back(coefficient_label(k, labels));
  j["coefficients"] = names;
  j["beta_hat"] = vec_json(fit.beta_hat);
  j["v_hat"] = vec_json(variance.v_hat);
  j["v_hat_B"] = vec_json(variance.v_hat_B);
  j["clamped"] = variance.clamped;
  j["se"] = vec_json(report.se);
  j["ci_lower"] = vec_json(report.ci_lower);
  j["ci_upper"] = vec_json(report.ci_upper);
  j["p_values"] = vec_json(report.p_values);
  j["bonferroni"] = vec_json(report.bonferroni);
  j["alpha"] = report.alpha;
  j["selection_freq"] = vec_json(fit.selection_freq);
  j["effective_splits"] = fit.effective_splits;
  j["plan"] = {{"n", fit.plan.n}, {"n1", fit.plan.n1}, {"q", fit.plan.q},
               {"B", fit.plan.B}, {"seed", fit.plan.seed}};
  auto splits = json::array();
  for (const SplitEstimate& s : fit.splits) {
    std::string members(static_cast<std::size_t>(fit.plan.n), '0');
    for (Index i = 0; i < fit.plan.n; ++i) {
      if (fit.plan.membership(s.b, i)) members[static_cast<std::size_t>(i)] = '1';
    }
    splits.push_back({{"b", s.b},
                      {"membership", members},
                      {"selected", s.selected},
                      {"beta_tilde", vec_json(s.beta_tilde)},
                      {"failed", s.failed},
                      {"pruned", s.pruned},
                      {"stabilized_count", s.stabilized_count},
                      {"retried", s.retried},
                      {"warnings", s.warnings}});
  }
  j["splits"] = splits;
  auto warnings = fit.warnings;
  warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
  j["warnings"] = warnings;
  auto out = open_out(path);
  out << j.dump(1) << '\n';
  finish(out, path);
}

void write_contrast_report(const std::string& path, const ContrastTest& test,
                           const std::vector<std::string>& subset_labels,
                           const SubvectorFit& fit) {
  auto out = open_out(path);
  out << "# subvector\n";
  out << "label,beta1_hat";
  for (const auto& l : subset_labels) out << ",cov_" << l;
  out << '\n';
  for (Index k = 0; k < test.beta1_hat.size(); ++k) {
    out << subset_labels[static_cast<std::size_t>(k)] << ',' << format_number(test.beta1_hat[k]);
    for (Index c = 0; c < test.sigma1_hat.cols(); ++c) out << ',' << format_number(test.sigma1_hat(k, c));
    out << '\n';
  }
  out << "# contrast\n";
  out << "statistic,df,p_value,effective_splits\n";
  out << format_number(test.T) << ',' << test.df << ',' << format_number(test.p_value) << ','
      << fit.effective_splits << '\n';
  finish(out, path);
}

void write_metrics_csv(const std::string& path, const MetricsReport& m) {
  auto out = open_out(path);
  out << "index,beta_star,bias,se,sd,cov_prob,cov_mcse,sel_freq,mse,reject_rate,reject_mcse\n";
  for (Index j = 0; j < m.beta_star.size(); ++j) {
    out << j << ',' << format_number(m.beta_star[j]) << ',' << format_number(m.bias[j]) << ','
        << format_number(m.mean_se[j]) << ',' << format_number(m.sd[j]) << ','
        << format_number(m.coverage[j]) << ',' << format_number(m.coverage_mcse[j]) << ','
        << format_number(m.sel_freq[j]) << ',' << format_number(m.mse[j]) << ','
        << format_number(m.rejection[j]) << ',' << format_number(m.rejection_mcse[j]) << '\n';
  }
  out << "noise,0," << format_number(m.noise_bias) << ',' << format_number(m.noise_se) << ','
      << format_number(m.noise_sd) << ',' << format_number(m.noise_coverage) << ",NA,"
      << format_number(m.noise_sel_freq) << ",NA," << format_number(m.noise_rejection) << ','
      << format_number(m.noise_rejection_mcse) << '\n';
  finish(out, path);
}

void write_metrics_summary(const std::string& path, const MetricsReport& m) {
  auto out = open_out(path);
  out << "key,value\n";
  out << "scenario," << m.scenario.name << '\n';
  out << "K," << m.scenario.K << '\n';
  out << "K_effective," << m.K_effective << '\n';
  out << "mse_avg," << format_number(m.mse_avg) << '\n';
  out << "noise_coverage," << format_number(m.noise_coverage) << '\n';
  out << "noise_reject_rate," << format_number(m.noise_rejection) << '\n';
  out << "noise_reject_mcse," << format_number(m.noise_rejection_mcse) << '\n';
  out << "mean_auc," << format_number(m.mean_auc) << '\n';
  finish(out, path);
}

void write_timing_csv(const std::string& path, const MetricsReport& m) {
  auto out = open_out(path);
  out << "replication,seconds\n";
  for (Index k = 0; k < m.seconds.size(); ++k) out << k << ',' << format_number(m.seconds[k]) << '\n';
  finish(out, path);
}

void write_q_sweep_csv(const std::string& path, const std::vector<QSweepPoint>& points) {
  auto out = open_out(path);
  out << "q,mse_avg,K_effective\n";
  for (const auto& pt : points) {
    out << format_number(pt.q) << ',' << format_number(pt.mse_avg) << ',' << pt.K_effective << '\n';
  }
  finish(out, path);
}

void write_contrast_rates_csv(const std::string& path, const ContrastReport& r) {
  auto out = open_out(path);
  out << "contrast,truth,reject_rate,reject_mcse,K_effective\n";
  for (std::size_t c = 0; c < r.contrasts.size(); ++c) {
    out << r.contrasts[c].name << ',' << format_number(r.true_value[c]) << ','
        << format_number(r.rejection[static_cast<Index>(c)]) << ','
        << format_number(r.rejection_mcse[static_cast<Index>(c)]) << ',' << r.K_effective << '\n';
  }
  finish(out, path);
}

}  // namespace ssglm
