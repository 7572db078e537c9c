#pragma once

namespace ssglm::stats {

double normal_cdf(double z);
/// Phi^{-1}(p) for p in (0, 1).
double normal_quantile(double p);
/// 2 * (1 - Phi(|z|)), evaluated through erfc to keep precision in the tail.
double two_sided_normal_p(double z);
/// P(chi^2_df > x).
double chi_squared_upper(double x, double df);

}  // namespace ssglm::stats
