#include "ssglm/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssglm/error.hpp"

namespace ssglm {

namespace {

// log(1 + e^theta) without overflow.
double softplus(double theta) noexcept {
  if (theta > 0.0) return theta + std::log1p(std::exp(-theta));
  return std::log1p(std::exp(theta));
}

constexpr double kMeanClamp = 1e-10;

}  // namespace

Family Family::from_name(std::string_view name) {
  if (name == "gaussian" || name == "normal") return gaussian();
  if (name == "binomial" || name == "binomial_logit" || name == "logistic") return binomial();
  if (name == "poisson") return poisson();
  throw Error(ErrorCode::invalid_argument, "unknown family '" + std::string(name) + "'");
}

std::string_view Family::name() const noexcept {
  switch (kind_) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::binomial_logit: return "binomial";
    case FamilyKind::poisson: return "poisson";
  }
  return "unknown";
}

FamilyValues Family::eval_saturating(double theta, bool& saturated) const noexcept {
  switch (kind_) {
    case FamilyKind::gaussian:
      return {0.5 * theta * theta, theta, 1.0};
    case FamilyKind::binomial_logit: {
      const double e = std::exp(-std::abs(theta));
      const double mu = theta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      // mu(1 - mu) written to stay positive for large |theta|
      const double nu = e / ((1.0 + e) * (1.0 + e));
      return {softplus(theta), mu, nu};
    }
    case FamilyKind::poisson: {
      if (theta > kPoissonThetaMax) {
        saturated = true;
        theta = kPoissonThetaMax;
      }
      const double mu = std::exp(theta);
      return {mu, mu, mu};
    }
  }
  return {0.0, 0.0, 0.0};
}

FamilyValues Family::eval(double theta) const {
  if (!std::isfinite(theta)) {
    throw Error(ErrorCode::non_finite_value, "family_eval: theta must be finite");
  }
  bool saturated = false;
  const FamilyValues v = eval_saturating(theta, saturated);
  if (saturated) {
    throw Error(ErrorCode::non_finite_cumulant,
                "poisson cumulant overflows at theta = " + std::to_string(theta));
  }
  return v;
}

double Family::cumulant(double theta) const { return eval(theta).cumulant; }
double Family::mean(double theta) const { return eval(theta).mean; }
double Family::variance(double theta) const { return eval(theta).variance; }

double Family::link(double mu) const noexcept {
  switch (kind_) {
    case FamilyKind::gaussian:
      return mu;
    case FamilyKind::binomial_logit: {
      const double m = std::clamp(mu, kMeanClamp, 1.0 - kMeanClamp);
      return std::log(m / (1.0 - m));
    }
    case FamilyKind::poisson:
      return std::log(std::max(mu, kMeanClamp));
  }
  return mu;
}

double Family::unit_deviance(double y, double eta) const noexcept {
  bool saturated = false;
  const FamilyValues v = eval_saturating(eta, saturated);
  switch (kind_) {
    case FamilyKind::gaussian:
      return (y - eta) * (y - eta);
    case FamilyKind::binomial_logit:
      // saturated term is zero for y in {0, 1}
      return 2.0 * (v.cumulant - y * eta);
    case FamilyKind::poisson: {
      const double sat = y > 0.0 ? y - y * std::log(y) : 0.0;
      return 2.0 * ((v.cumulant - y * eta) - sat);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool Family::valid_response(double y) const noexcept {
  if (!std::isfinite(y)) return false;
  switch (kind_) {
    case FamilyKind::gaussian: return true;
    case FamilyKind::binomial_logit: return y == 0.0 || y == 1.0;
    case FamilyKind::poisson: return y >= 0.0 && std::floor(y) == y;
  }
  return false;
}

}  // namespace ssglm
