#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ssglm/types.hpp"

namespace ssglm::cli {

/// Everything one invocation needs, after flags and the optional config file
/// have been merged.
struct RunConfig {
  std::string command;  ///< fit, contrast or simulate

  std::string input;
  std::string response = "y";
  char delimiter = ',';
  bool center = true;
  std::string interact_modifier;
  std::vector<std::string> interact_targets;
  std::string interact_prefix = "I_";

  std::string family = "gaussian";
  std::string selector = "sis";
  Index sis_cap = 0;  ///< 0 = n2 / log n2
  Index folds = 10;
  Index n_lambda = 100;
  double lambda_ratio = 1e-3;
  double q = 0.5;
  Index B = 500;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  int threads = 1;
  std::string out = ".";

  std::vector<std::string> subset;  ///< column labels; 1-based numbers for simulate
  std::string contrast_Q;           ///< rows separated by ';', entries by ','
  std::string contrast_R;

  std::string scenario;
  std::string preset;
  Index K = 0;      ///< 0 keeps the scenario's value
  Index sim_B = 0;  ///< 0 keeps the scenario's value
  std::vector<double> q_sweep;
  std::string dump_scenario;
};

/// "1,0;0,1" -> rows of numbers. Throws Error(config_error) on bad input.
std::vector<std::vector<double>> parse_matrix(const std::string& text);

/// Runs a complete config. Throws ssglm::Error on failure.
void run_command(const RunConfig& config, std::ostream& out);

/// Parses arguments (without the program name), runs the command and returns
/// the exit status: 0 on success, otherwise the numeric ErrorCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssglm::cli
