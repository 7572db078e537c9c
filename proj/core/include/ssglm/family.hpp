#pragma once

#include <string>
#include <string_view>

namespace ssglm {

enum class FamilyKind { gaussian, binomial_logit, poisson };

/// A(theta), A'(theta) and A''(theta) at one natural parameter value.
struct FamilyValues {
  double cumulant;
  double mean;
  double variance;
};

/// Canonical-link exponential family with density exp{y*theta - A(theta) + c(y)}.
///
/// The c(y) term never enters the fitted objective, so all likelihood values
/// in this library omit it.
class Family {
 public:
  /// Poisson natural parameters above this bound are treated as overflow.
  static constexpr double kPoissonThetaMax = 354.8913564;  // log(DBL_MAX) / 2

  constexpr explicit Family(FamilyKind kind = FamilyKind::gaussian) noexcept : kind_(kind) {}

  static constexpr Family gaussian() noexcept { return Family(FamilyKind::gaussian); }
  static constexpr Family binomial() noexcept { return Family(FamilyKind::binomial_logit); }
  static constexpr Family poisson() noexcept { return Family(FamilyKind::poisson); }
  /// Accepts "gaussian", "binomial", "binomial_logit", "logistic" and "poisson".
  static Family from_name(std::string_view name);

  constexpr FamilyKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;

  /// Throws Error(non_finite_cumulant) when a Poisson theta overflows.
  FamilyValues eval(double theta) const;

  /// Same as eval() but clamps an overflowing Poisson theta and reports it.
  FamilyValues eval_saturating(double theta, bool& saturated) const noexcept;

  double cumulant(double theta) const;
  double mean(double theta) const;
  double variance(double theta) const;

  /// Canonical link g(mu), with mu clamped into the interior of the mean domain.
  double link(double mu) const noexcept;

  /// Per-observation deviance contribution 2{(A(eta) - y eta) - (A(theta_y) - y theta_y)}
  /// where theta_y is the saturated natural parameter.
  double unit_deviance(double y, double eta) const noexcept;

  /// Whether y is a legal response value for this family.
  bool valid_response(double y) const noexcept;

  friend constexpr bool operator==(Family a, Family b) noexcept { return a.kind_ == b.kind_; }

 private:
  FamilyKind kind_;
};

}  // namespace ssglm
