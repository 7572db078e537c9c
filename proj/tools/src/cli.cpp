#include "cli.hpp"

#include <cctype>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ssglm/dataset.hpp"
#include "ssglm/error.hpp"
#include "ssglm/inference.hpp"
#include "ssglm/report.hpp"
#include "ssglm/simulation.hpp"
#include "ssglm/split_smooth.hpp"

namespace ssglm::cli {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void config_fail(const std::string& msg) { throw Error(ErrorCode::config_error, msg); }

void check_config(const RunConfig& c) {
  if (c.command != "fit" && c.command != "contrast" && c.command != "simulate") {
    config_fail("unknown command '" + c.command + "'");
  }
  if (c.command != "simulate" && c.input.empty()) config_fail("--input is required for " + c.command);
  if (!(c.q > 0.0 && c.q < 1.0)) config_fail("--q must lie in (0, 1)");
  if (c.B < 1) config_fail("--B must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) config_fail("--alpha must lie in (0, 1)");
  if (c.threads < 1) config_fail("--threads must be at least 1");
  if (c.selector != "sis" && c.selector != "lasso-cv") {
    config_fail("--selector must be sis or lasso-cv");
  }
  if (c.folds < 2) config_fail("--folds must be at least 2");
  if (c.command == "contrast" && c.subset.empty()) config_fail("contrast needs --subset");
  if (c.command == "simulate" && c.scenario.empty() == c.preset.empty()) {
    config_fail("simulate needs exactly one of --scenario and --preset");
  }
}

SelectorSpec selector_spec(const RunConfig& c) {
  SelectorSpec s;
  s.kind = c.selector;
  s.sis_cap = c.sis_cap;
  s.folds = c.folds;
  s.n_lambda = c.n_lambda;
  s.lambda_ratio = c.lambda_ratio;
  return s;
}

SsglmOptions fit_options(const RunConfig& c) {
  SsglmOptions o;
  o.q = c.q;
  o.B = c.B;
  o.seed = c.seed;
  o.threads = c.threads;
  return o;
}

Dataset read_input(const RunConfig& c) {
  LoadOptions lo;
  lo.delimiter = c.delimiter;
  lo.center = false;
  Dataset d = load_dataset(c.input, c.response, lo);
  if (!c.interact_modifier.empty()) {
    if (c.interact_targets.empty()) config_fail("--interact-modifier needs --interact-targets");
    d = expand_interactions(d, c.interact_modifier, c.interact_targets, c.interact_prefix);
  }
  if (c.center) d.center_columns();
  return d;
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create output directory '" + c.out + "'");
  return dir;
}

void run_fit(const RunConfig& c, std::ostream& out) {
  const Dataset data = read_input(c);
  const Family family = Family::from_name(c.family);
  const auto selector = make_selector(selector_spec(c));
  const SmoothedFit fit = ssglm_fit(data, family, *selector, fit_options(c));
  const VarianceEstimate variance = estimate_variance(fit);
  const InferenceReport report = infer(fit, variance, c.alpha);
  const fs::path dir = prepare_out(c);
  write_results_csv((dir / "results.csv").string(), result_table(report, data.labels));
  write_fit_json((dir / "fit.json").string(), fit, report, variance, data.labels);
  out << "fit: n=" << data.rows() << " p=" << data.cols() << " B=" << c.B << " -> "
      << (dir / "results.csv").string() << '\n';
  for (const auto& w : fit.warnings) out << "warning: " << w << '\n';
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, Index cols, const char* what) {
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Index>(rows[r].size()) != cols) {
      config_fail(std::string(what) + " row " + std::to_string(r + 1) + " has " +
                  std::to_string(rows[r].size()) + " entries, expected " + std::to_string(cols));
    }
    for (Index k = 0; k < cols; ++k) m(static_cast<Index>(r), k) = rows[r][static_cast<std::size_t>(k)];
  }
  return m;
}

/// Q (default identity) and R (default zero) for a subvector of size p1.
std::pair<Matrix, Vector> contrast_spec(const RunConfig& c, Index p1) {
  Matrix Q = c.contrast_Q.empty() ? Matrix(Matrix::Identity(p1, p1))
                                  : to_matrix(parse_matrix(c.contrast_Q), p1, "--contrast-Q");
  Vector R = Vector::Zero(Q.rows());
  if (!c.contrast_R.empty()) {
    const auto rows = parse_matrix(c.contrast_R);
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    if (static_cast<Index>(flat.size()) != Q.rows()) {
      config_fail("--contrast-R has " + std::to_string(flat.size()) + " entries but Q has " +
                  std::to_string(Q.rows()) + " rows");
    }
    R = Eigen::Map<const Vector>(flat.data(), Q.rows());
  }
  return {Q, R};
}

void run_contrast(const RunConfig& c, std::ostream& out) {
  const Dataset data = read_input(c);
  const Family family = Family::from_name(c.family);
  const auto selector = make_selector(selector_spec(c));
  IndexSet S1;
  for (const auto& label : c.subset) S1.push_back(data.column_index(label));
  const auto [Q, R] = contrast_spec(c, static_cast<Index>(S1.size()));
  const SubvectorFit fit = subvector_fit(data, family, *selector, S1, fit_options(c));
  const Matrix sigma = subvector_covariance(fit);
  ContrastTest test = contrast_test(fit.beta1_hat, sigma, Q, R);
  test.subset = S1;
  const fs::path dir = prepare_out(c);
  write_contrast_report((dir / "contrast.csv").string(), test, c.subset, fit);
  out << "contrast: T=" << format_number(test.T) << " df=" << test.df
      << " p=" << format_number(test.p_value) << '\n';
  for (const auto& w : fit.warnings) out << "warning: " << w << '\n';
}

void run_simulate(const RunConfig& c, std::ostream& out, bool seed_set, bool threads_set) {
  SimScenario s = c.scenario.empty() ? scenarios::by_name(c.preset) : load_scenario(c.scenario);
  if (c.K > 0) s.K = c.K;
  if (c.sim_B > 0) s.B = c.sim_B;
  if (seed_set) s.seed = c.seed;
  if (threads_set) s.threads = c.threads;
  validate_scenario(s);
  const fs::path dir = prepare_out(c);
  if (!c.dump_scenario.empty()) {
    save_scenario(c.dump_scenario, s);
    out << "scenario written to " << c.dump_scenario << '\n';
    return;
  }
  if (!c.subset.empty()) {
    IndexSet subset;
    for (const auto& t : c.subset) {
      try {
        subset.push_back(std::stol(t));
      } catch (const std::exception&) {
        config_fail("simulate --subset takes 1-based predictor numbers, got '" + t + "'");
      }
    }
    const auto [Q, R] = contrast_spec(c, static_cast<Index>(subset.size()));
    std::vector<Contrast> contrasts;
    for (Index r = 0; r < Q.rows(); ++r) {
      contrasts.push_back({"row" + std::to_string(r + 1), Q.row(r), R.segment(r, 1)});
    }
    const ContrastReport rep = contrast_scenario(s, subset, contrasts);
    write_contrast_rates_csv((dir / "contrast_rates.csv").string(), rep);
    out << "simulate: " << s.name << " contrasts K_effective=" << rep.K_effective << '\n';
    return;
  }
  if (!c.q_sweep.empty()) {
    const auto points = q_sweep(s, c.q_sweep);
    write_q_sweep_csv((dir / "plotdata_q_mse.csv").string(), points);
    out << "simulate: " << s.name << " q sweep over " << points.size() << " values\n";
    return;
  }
  const MetricsReport m = run_scenario(s);
  write_metrics_csv((dir / "metrics.csv").string(), m);
  write_metrics_summary((dir / "summary.csv").string(), m);
  write_timing_csv((dir / "timing.csv").string(), m);
  write_q_sweep_csv((dir / "plotdata_q_mse.csv").string(),
                    {QSweepPoint{s.q, m.mse_avg, m.K_effective}});
  out << "simulate: " << s.name << " K_effective=" << m.K_effective << "/" << s.K
      << " mse_avg=" << format_number(m.mse_avg) << '\n';
  for (const auto& f : m.failures) out << "warning: " << f << '\n';
}

void report_error(std::ostream& err, std::string_view code, int status, const std::string& msg) {
  err << "ssglm: error [" << code << ", exit " << status << "]: " << msg << '\n';
}

}  // namespace

std::vector<std::vector<double>> parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::vector<double> values;
    std::stringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used == 0 || used != cell.size()) config_fail("cannot parse number '" + cell + "'");
      values.push_back(v);
    }
    if (values.empty()) config_fail("empty row in matrix '" + text + "'");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) config_fail("empty matrix");
  return rows;
}

void run_command(const RunConfig& config, std::ostream& out) {
  check_config(config);
  if (config.command == "fit") {
    run_fit(config, out);
  } else if (config.command == "contrast") {
    run_contrast(config, out);
  } else {
    run_simulate(config, out, true, true);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Splitting-and-smoothing inference for high-dimensional GLMs", "ssglm"};
  app.set_config("--config", "", "TOML/INI file with option values; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);
  app.fallthrough();

  auto* fit_cmd = app.add_subcommand("fit", "Estimate and test every coefficient");
  auto* contrast_cmd = app.add_subcommand("contrast", "Wald test of linear contrasts on a subvector");
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation scenario");
  for (auto* sub : {fit_cmd, contrast_cmd, sim_cmd}) sub->fallthrough();

  std::string delimiter = ",";
  bool tab = false;
  bool no_center = false;
  app.add_option("--input", c.input, "Delimited data file with a header row");
  app.add_option("--response", c.response, "Response column name")->capture_default_str();
  app.add_option("--delimiter", delimiter, "Field delimiter (one character)")->capture_default_str();
  app.add_flag("--tab", tab, "Tab-delimited input");
  app.add_flag("--no-center", no_center, "Do not center predictor columns");
  app.add_option("--family", c.family, "gaussian, binomial or poisson")
      ->check(CLI::IsMember({"gaussian", "binomial", "poisson"}))
      ->capture_default_str();
  app.add_option("--selector", c.selector, "sis or lasso-cv")
      ->check(CLI::IsMember({"sis", "lasso-cv"}))
      ->capture_default_str();
  app.add_option("--sis-cap", c.sis_cap, "Screening size (0 = n2 / log n2)")->check(CLI::NonNegativeNumber);
  app.add_option("--folds", c.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  app.add_option("--n-lambda", c.n_lambda, "Lasso grid size")->check(CLI::Range(2, 10000));
  app.add_option("--lambda-ratio", c.lambda_ratio, "Smallest / largest lambda")
      ->check(CLI::Range(1e-8, 1.0));
  auto* q_opt = app.add_option("--q", c.q, "Estimation fraction n1 / n")->capture_default_str();
  q_opt->check(CLI::Range(0.0, 1.0));
  app.add_option("--B", c.B, "Number of random splits")->check(CLI::PositiveNumber)->capture_default_str();
  auto* seed_opt = app.add_option("--seed", c.seed, "Root random seed")->capture_default_str();
  app.add_option("--alpha", c.alpha, "Test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  auto* threads_opt = app.add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--subset", c.subset, "Subvector column labels (simulate: 1-based numbers)")
      ->delimiter(',');
  app.add_option("--contrast-Q", c.contrast_Q, "Contrast rows, e.g. \"1,0;0,1\" (default identity)");
  app.add_option("--contrast-R", c.contrast_R, "Right-hand side, e.g. \"0,0\" (default zero)");
  app.add_option("--interact-modifier", c.interact_modifier, "Binary column multiplied into targets");
  app.add_option("--interact-targets", c.interact_targets, "Columns to interact with the modifier")
      ->delimiter(',');
  app.add_option("--interact-prefix", c.interact_prefix, "Label prefix of interaction columns")
      ->capture_default_str();
  app.add_option("--scenario", c.scenario, "Scenario JSON file");
  app.add_option("--preset", c.preset, "Built-in scenario name");
  app.add_option("--K", c.K, "Override the replication count")->check(CLI::NonNegativeNumber);
  app.add_option("--sim-B", c.sim_B, "Override the scenario's split count")->check(CLI::NonNegativeNumber);
  app.add_option("--q-sweep", c.q_sweep, "Comma-separated q values for an MSE sweep")->delimiter(',');
  app.add_option("--dump-scenario", c.dump_scenario, "Write the resolved scenario and exit");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int status = static_cast<int>(ErrorCode::config_error);
    report_error(err, to_string(ErrorCode::config_error), status, e.what());
    return status;
  }

  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  if (tab) {
    c.delimiter = '\t';
  } else if (delimiter == "\\t") {
    c.delimiter = '\t';
  } else if (delimiter.size() == 1) {
    c.delimiter = delimiter[0];
  } else {
    const int status = static_cast<int>(ErrorCode::config_error);
    report_error(err, to_string(ErrorCode::config_error), status,
                 "--delimiter must be a single character");
    return status;
  }
  c.center = !no_center;

  try {
    check_config(c);
    if (c.command == "fit") {
      run_fit(c, out);
    } else if (c.command == "contrast") {
      run_contrast(c, out);
    } else {
      run_simulate(c, out, seed_opt->count() > 0, threads_opt->count() > 0);
    }
  } catch (const Error& e) {
    const int status = static_cast<int>(e.code());
    report_error(err, to_string(e.code()), status, e.what());
    return status;
  } catch (const std::exception& e) {
    report_error(err, "internal", 1, e.what());
    return 1;
  }
  return 0;
}

}  // namespace ssglm::cli
