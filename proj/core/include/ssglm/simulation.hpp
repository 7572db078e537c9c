#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ssglm/family.hpp"
#include "ssglm/inference.hpp"
#include "ssglm/rng.hpp"
#include "ssglm/selection.hpp"
#include "ssglm/types.hpp"

namespace ssglm {

struct CorrelationSpec {
  enum class Kind { identity, ar1, cs };
  Kind kind = Kind::identity;
  double rho = 0.0;
};

/// Truth specification. Indices are 1-based predictor numbers (0 is the intercept).
struct BetaSpec {
  enum class Kind { fixed, random, nonsparse };
  Kind kind = Kind::fixed;
  std::vector<Index> indices;  ///< fixed and nonsparse: positions of `values`
  std::vector<double> values;
  Index s0 = 0;         ///< random: number of signals
  double low = 0.5;     ///< random: |beta| ~ U(low, high) with a random sign
  double high = 1.5;
  Index dense_count = 0;        ///< nonsparse: extra small coefficients
  double dense_half_width = 0;  ///< nonsparse: extra coefficients ~ U[-w, w]
  double intercept = 0.0;
};

struct SimScenario {
  std::string name = "custom";
  /// gaussian, binomial, poisson or negative_binomial (generation only)
  std::string response = "gaussian";
  double nb_dispersion = 10.0;
  /// Family used for fitting; empty means the response family (poisson for negative_binomial).
  std::string fit_family;
  Index n = 100;
  Index p = 10;
  BetaSpec beta{};
  CorrelationSpec correlation{};
  double q = 0.5;
  Index B = 100;
  Index K = 50;
  SelectorSpec selector{};
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int threads = 1;

  Family family() const;
};

void to_json(nlohmann::json& j, const SimScenario& s);
/// Throws Error(scenario_error) on unknown keys, wrong types or invalid values.
void from_json(const nlohmann::json& j, SimScenario& s);
SimScenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const SimScenario& s);
/// Throws Error(scenario_error) unless the scenario is internally consistent.
void validate_scenario(const SimScenario& s);

/// Presets. All but table1 select by SIS; the logistic ones screen
/// n2 / (4 log n2) columns instead of the default n2 / log n2.
namespace scenarios {
/// Poisson, n = 300, p = 400, five signals, ten-fold CV lasso selection.
SimScenario table1();
/// Poisson, n = 400, p = 500, six signals with intercept 1.
SimScenario table2(CorrelationSpec correlation = {});
/// Gaussian, n = 500, p = 1000, ten random signals.
SimScenario example1(double q = 0.5);
/// Logistic, n = 400, p = 500, signals (-2, -1, 1, 2) at 218, 242, 269, 417.
SimScenario example4(CorrelationSpec correlation = {});
/// Logistic, n = 200, p = 300, signals (2, -2, 2) at 10, 20, 30, AR(1) design.
SimScenario table5(double rho = 0.25);
/// Negative binomial data fitted as Poisson, n = 300, p = 500, B = 300.
SimScenario appendix_b1();
/// Non-sparse gaussian truth, n = 300, p = 500.
SimScenario appendix_b2();
/// Names accepted by by_name.
std::vector<std::string> names();
SimScenario by_name(const std::string& name);
}  // namespace scenarios

/// n x p rows drawn from N(0, Sigma) through a Cholesky factor of Sigma, then
/// column-centered. Throws Error(scenario_error) for an invalid rho.
Matrix gen_design(Index n, Index p, const CorrelationSpec& correlation, Stream stream);

struct Truth {
  Vector beta;     ///< length p + 1, intercept first
  IndexSet support;  ///< 1-based positions of nonzero slopes, ascending
};
Truth gen_truth(Index p, const BetaSpec& spec, Stream stream);

/// Draws a response for the linear predictor x̄ beta. Throws
/// Error(non_finite_value) if a Poisson or negative binomial mean overflows.
Vector gen_response(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& beta,
                    const std::string& response, double nb_dispersion, Stream stream);

/// Area under the ROC curve of `score` for binary labels (ties count one half).
double auc(const Eigen::Ref<const Vector>& labels, const Eigen::Ref<const Vector>& score);

struct MetricsReport {
  SimScenario scenario;
  Vector beta_star;   ///< length p + 1
  IndexSet support;   ///< 1-based
  Index K_effective = 0;
  std::vector<std::string> failures;  ///< "replication k: message"

  // Per replication (rows) and coefficient (columns), successful replications only.
  Matrix estimates;
  Matrix std_errors;
  Matrix p_values;
  Matrix covered;  ///< 1 if the interval contained the truth
  Matrix selected_freq;  ///< K x p, per-replication selection frequencies
  Vector auc;            ///< per replication, logistic fits only
  Vector seconds;        ///< wall time per replication

  // Per coefficient (length p + 1).
  Vector bias;
  Vector mean_se;
  Vector sd;
  Vector coverage;
  Vector coverage_mcse;
  Vector rejection;
  Vector rejection_mcse;
  Vector sel_freq;  ///< NaN at the intercept
  Vector mse;

  double mse_avg = 0;  ///< mean MSE over slopes
  double noise_bias = 0;
  double noise_se = 0;
  double noise_sd = 0;
  double noise_coverage = 0;
  double noise_rejection = 0;
  double noise_rejection_mcse = 0;
  double noise_sel_freq = 0;
  double mean_auc = 0;
};

/// K replications of data generation, ssglm_fit and inference. Replication k
/// draws everything from Stream(seed).substream("replication").substream(k).
MetricsReport run_scenario(const SimScenario& scenario);

struct QSweepPoint {
  double q;
  double mse_avg;
  Index K_effective;
};
/// run_scenario at each q with the same replication seeds.
std::vector<QSweepPoint> q_sweep(const SimScenario& scenario, const std::vector<double>& qs);

struct Contrast {
  std::string name;
  Matrix Q;  ///< r x |subset|
  Vector R;
};

struct ContrastReport {
  SimScenario scenario;
  IndexSet subset;  ///< 1-based
  std::vector<Contrast> contrasts;
  Index K_effective = 0;
  std::vector<std::string> failures;
  Vector truth;               ///< beta* on the subset
  Vector mean_beta1;          ///< average subvector estimate
  Matrix mean_sigma1;         ///< average estimated covariance
  Matrix empirical_sigma1;    ///< covariance of the estimates across replications
  Vector rejection;           ///< per contrast
  Vector rejection_mcse;
  std::vector<double> true_value;  ///< Q beta* - R per contrast (first row)
};

ContrastReport contrast_scenario(const SimScenario& scenario, const IndexSet& subset,
                                 const std::vector<Contrast>& contrasts);

}  // namespace ssglm
