#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "ssglm/error.hpp"
#include "ssglm/simulation.hpp"

namespace ssglm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::scenario_error, msg); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    fail("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

std::string correlation_name(CorrelationSpec::Kind k) {
  switch (k) {
    case CorrelationSpec::Kind::identity: return "identity";
    case CorrelationSpec::Kind::ar1: return "ar1";
    case CorrelationSpec::Kind::cs: return "cs";
  }
  return "identity";
}

std::string beta_name(BetaSpec::Kind k) {
  switch (k) {
    case BetaSpec::Kind::fixed: return "fixed";
    case BetaSpec::Kind::random: return "random";
    case BetaSpec::Kind::nonsparse: return "nonsparse";
  }
  return "fixed";
}

}  // namespace

void to_json(json& j, const SimScenario& s) {
  j = json{
      {"name", s.name},
      {"response", s.response},
      {"nb_dispersion", s.nb_dispersion},
      {"fit_family", s.fit_family},
      {"n", s.n},
      {"p", s.p},
      {"beta",
       {{"kind", beta_name(s.beta.kind)},
        {"indices", s.beta.indices},
        {"values", s.beta.values},
        {"s0", s.beta.s0},
        {"low", s.beta.low},
        {"high", s.beta.high},
        {"dense_count", s.beta.dense_count},
        {"dense_half_width", s.beta.dense_half_width},
        {"intercept", s.beta.intercept}}},
      {"correlation", {{"kind", correlation_name(s.correlation.kind)}, {"rho", s.correlation.rho}}},
      {"q", s.q},
      {"B", s.B},
      {"K", s.K},
      {"selector",
       {{"kind", s.selector.kind},
        {"sis_cap", s.selector.sis_cap},
        {"folds", s.selector.folds},
        {"n_lambda", s.selector.n_lambda},
        {"lambda_ratio", s.selector.lambda_ratio}}},
      {"alpha", s.alpha},
      {"seed", s.seed},
      {"threads", s.threads},
  };
}

void from_json(const json& j, SimScenario& s) {
  const std::string top = "scenario";
  reject_unknown(j,
                 {"name", "response", "nb_dispersion", "fit_family", "n", "p", "beta",
                  "correlation", "q", "B", "K", "selector", "alpha", "seed", "threads"},
                 top);
  SimScenario out;
  read(j, "name", out.name, top);
  read(j, "response", out.response, top);
  read(j, "nb_dispersion", out.nb_dispersion, top);
  read(j, "fit_family", out.fit_family, top);
  read(j, "n", out.n, top);
  read(j, "p", out.p, top);
  read(j, "q", out.q, top);
  read(j, "B", out.B, top);
  read(j, "K", out.K, top);
  read(j, "alpha", out.alpha, top);
  read(j, "seed", out.seed, top);
  read(j, "threads", out.threads, top);

  if (const auto it = j.find("beta"); it != j.end()) {
    const std::string where = "beta";
    reject_unknown(*it,
                   {"kind", "indices", "values", "s0", "low", "high", "dense_count",
                    "dense_half_width", "intercept"},
                   where);
    std::string kind = beta_name(out.beta.kind);
    read(*it, "kind", kind, where);
    if (kind == "fixed") {
      out.beta.kind = BetaSpec::Kind::fixed;
    } else if (kind == "random") {
      out.beta.kind = BetaSpec::Kind::random;
    } else if (kind == "nonsparse") {
      out.beta.kind = BetaSpec::Kind::nonsparse;
    } else {
      fail("unknown beta kind '" + kind + "'");
    }
    read(*it, "indices", out.beta.indices, where);
    read(*it, "values", out.beta.values, where);
    read(*it, "s0", out.beta.s0, where);
    read(*it, "low", out.beta.low, where);
    read(*it, "high", out.beta.high, where);
    read(*it, "dense_count", out.beta.dense_count, where);
    read(*it, "dense_half_width", out.beta.dense_half_width, where);
    read(*it, "intercept", out.beta.intercept, where);
  }
  if (const auto it = j.find("correlation"); it != j.end()) {
    const std::string where = "correlation";
    reject_unknown(*it, {"kind", "rho"}, where);
    std::string kind = correlation_name(out.correlation.kind);
    read(*it, "kind", kind, where);
    if (kind == "identity") {
      out.correlation.kind = CorrelationSpec::Kind::identity;
    } else if (kind == "ar1") {
      out.correlation.kind = CorrelationSpec::Kind::ar1;
    } else if (kind == "cs") {
      out.correlation.kind = CorrelationSpec::Kind::cs;
    } else {
      fail("unknown correlation kind '" + kind + "'");
    }
    read(*it, "rho", out.correlation.rho, where);
  }
  if (const auto it = j.find("selector"); it != j.end()) {
    const std::string where = "selector";
    reject_unknown(*it, {"kind", "sis_cap", "folds", "n_lambda", "lambda_ratio"}, where);
    read(*it, "kind", out.selector.kind, where);
    read(*it, "sis_cap", out.selector.sis_cap, where);
    read(*it, "folds", out.selector.folds, where);
    read(*it, "n_lambda", out.selector.n_lambda, where);
    read(*it, "lambda_ratio", out.selector.lambda_ratio, where);
  }
  validate_scenario(out);
  s = std::move(out);
}

SimScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail("cannot parse '" + path + "': " + e.what());
  }
  return j.get<SimScenario>();
}

void save_scenario(const std::string& path, const SimScenario& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << json(s).dump(2) << '\n';
}

void validate_scenario(const SimScenario& s) {
  if (s.response != "gaussian" && s.response != "binomial" && s.response != "poisson" &&
      s.response != "negative_binomial") {
    fail("unknown response '" + s.response + "'");
  }
  try {
    (void)s.family();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (s.n < 4 || s.p < 1) fail("need n >= 4 and p >= 1");
  if (!(s.q > 0.0 && s.q < 1.0)) fail("q must lie in (0, 1)");
  if (s.B < 2) fail("B must be at least 2");
  if (s.K < 1) fail("K must be at least 1");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (s.threads < 1) fail("threads must be at least 1");
  if (!(s.nb_dispersion > 0.0)) fail("nb_dispersion must be positive");
  if (s.selector.kind != "sis" && s.selector.kind != "lasso-cv") {
    fail("unknown selector '" + s.selector.kind + "'");
  }
  const double rho = s.correlation.rho;
  if (s.correlation.kind != CorrelationSpec::Kind::identity && !(rho > -1.0 && rho < 1.0)) {
    fail("rho must lie in (-1, 1)");
  }
  if (s.correlation.kind == CorrelationSpec::Kind::cs &&
      !(rho > -1.0 / static_cast<double>(std::max<Index>(s.p - 1, 1)))) {
    fail("compound symmetry with this rho is not positive definite");
  }
  const BetaSpec& b = s.beta;
  if (b.kind != BetaSpec::Kind::random && b.indices.size() != b.values.size()) {
    fail("beta indices and values differ in length");
  }
  std::set<Index> used;
  for (const Index i : b.indices) {
    if (i < 1 || i > s.p) fail("beta index " + std::to_string(i) + " outside 1..p");
    if (!used.insert(i).second) fail("beta index " + std::to_string(i) + " repeated");
  }
  if (b.kind == BetaSpec::Kind::random) {
    if (b.s0 < 0 || b.s0 > s.p) fail("s0 must lie in 0..p");
    if (!(b.low >= 0.0 && b.high >= b.low)) fail("random magnitudes need 0 <= low <= high");
  }
  if (b.kind == BetaSpec::Kind::nonsparse &&
      (b.dense_count < 0 || b.dense_count + static_cast<Index>(b.indices.size()) > s.p ||
       b.dense_half_width < 0.0)) {
    fail("nonsparse truth does not fit in p");
  }
}

}  // namespace ssglm
