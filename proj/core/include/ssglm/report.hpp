#pragma once

#include <string>
#include <vector>

#include "ssglm/inference.hpp"
#include "ssglm/simulation.hpp"
#include "ssglm/split_smooth.hpp"

namespace ssglm {

struct ResultRow {
  std::string label;
  Index position = 0;  ///< 0 = intercept, j = predictor j
  double beta = 0;
  double se = 0;
  double t = 0;
  double p_value = 1;
  double adjusted = 1;
  double sel_freq = 0;  ///< NaN for the intercept
};

/// One row per coefficient, sorted by ascending p-value (ties keep coefficient
/// order, undefined p-values last).
std::vector<ResultRow> result_table(const InferenceReport& report,
                                    const std::vector<std::string>& labels);

/// 6 significant digits; non-finite values print as NA.
std::string format_number(double v);

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
/// Full-precision dump of the fit, its inference and the split plan.
void write_fit_json(const std::string& path, const SmoothedFit& fit, const InferenceReport& report,
                    const VarianceEstimate& variance, const std::vector<std::string>& labels);

void write_contrast_report(const std::string& path, const ContrastTest& test,
                           const std::vector<std::string>& subset_labels,
                           const SubvectorFit& fit);

/// Per-coefficient simulation metrics with a trailing noise-average row.
void write_metrics_csv(const std::string& path, const MetricsReport& m);
void write_metrics_summary(const std::string& path, const MetricsReport& m);
void write_timing_csv(const std::string& path, const MetricsReport& m);
void write_q_sweep_csv(const std::string& path, const std::vector<QSweepPoint>& points);
void write_contrast_rates_csv(const std::string& path, const ContrastReport& r);

}  // namespace ssglm
