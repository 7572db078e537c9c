#pragma once

#include <cmath>
#include <limits>

#include "ssglm/family.hpp"
#include "ssglm/types.hpp"

namespace ssglm::detail {

struct PointwiseFit {
  double objective;  // unpenalized (1/n) sum {A(eta) - y eta}
  bool saturated;
};

// Pointwise mean and variance for a whole vector of natural parameters.
// Returns sum_i {A(eta_i) - y_i eta_i}; a Poisson eta above the overflow
// bound is clamped and reported through `saturated`.
inline double evaluate_batch(const Family& family, const Eigen::Ref<const Eigen::ArrayXd>& y,
                             const Eigen::Ref<const Eigen::ArrayXd>& eta, Eigen::ArrayXd& mu,
                             Eigen::ArrayXd& nu, bool& saturated) {
  switch (family.kind()) {
    case FamilyKind::gaussian:
      mu = eta;
      nu.setOnes(eta.size());
      return (0.5 * eta.square() - y * eta).sum();
    case FamilyKind::binomial_logit: {
      const Eigen::ArrayXd e = (-eta.abs()).exp();
      const Eigen::ArrayXd inv = 1.0 / (1.0 + e);
      mu = (eta >= 0.0).select(inv, e * inv);
      // mu(1 - mu) written to stay positive for large |eta|
      nu = e * inv.square();
      return (eta.max(0.0) + e.log1p() - y * eta).sum();
    }
    case FamilyKind::poisson: {
      constexpr double bound = Family::kPoissonThetaMax;
      if ((eta > bound).any()) saturated = true;
      mu = eta.min(bound).exp();
      nu = mu;
      return (mu - y * eta.min(bound)).sum();
    }
  }
  return 0.0;
}

// Fills mu and nu from eta and returns the unpenalized objective, or +inf
// if a Poisson natural parameter overflowed.
inline PointwiseFit evaluate(const Family& family, const Vector& y, const Vector& eta, Vector& mu,
                             Vector& nu) {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  bool saturated = false;
  const double total = evaluate_batch(family, y.array(), eta.array(), m, v, saturated);
  mu = m.matrix();
  nu = v.matrix();
  if (saturated || !std::isfinite(total)) {
    return {std::numeric_limits<double>::infinity(), saturated};
  }
  return {total / static_cast<double>(eta.size()), false};
}

inline double objective_only(const Family& family, const Vector& y, const Vector& eta,
                             bool& saturated) {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  const double total = evaluate_batch(family, y.array(), eta.array(), m, v, saturated);
  if (saturated || !std::isfinite(total)) return std::numeric_limits<double>::infinity();
  return total / static_cast<double>(eta.size());
}

// Step acceptance for monotone descent. A candidate whose objective matches
// the current one to rounding level is accepted only if it also shrinks the
// score, since objective differences carry no information at that scale.
inline bool accept_step(double candidate, double current, double candidate_score,
                        double current_score) {
  if (!std::isfinite(candidate)) return false;
  if (candidate <= current) return true;
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(current));
  return candidate - current <= noise && candidate_score < current_score;
}

}  // namespace ssglm::detail
