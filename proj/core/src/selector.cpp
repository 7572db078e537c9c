#include "ssglm/error.hpp"
#include "ssglm/selection.hpp"

namespace ssglm {

SelectionResult SisSelector::select(const Eigen::Ref<const Vector>& y,
                                    const Eigen::Ref<const Matrix>& X, const Family& family,
                                    Stream) const {
  return sis_select(y, X, family, cap_ > 0 ? cap_ : default_sis_cap(X.rows()));
}

SelectionResult CvLassoSelector::select(const Eigen::Ref<const Vector>& y,
                                        const Eigen::Ref<const Matrix>& X, const Family& family,
                                        Stream stream) const {
  return cv_select(y, X, family, stream, options_);
}

std::unique_ptr<Selector> make_selector(const SelectorSpec& spec) {
  if (spec.kind == "sis") {
    if (spec.sis_cap < 0) throw Error(ErrorCode::invalid_argument, "sis cap must be >= 0");
    return std::make_unique<SisSelector>(spec.sis_cap);
  }
  if (spec.kind == "lasso-cv" || spec.kind == "lasso_cv" || spec.kind == "cv-lasso") {
    CvOptions options;
    options.folds = spec.folds;
    options.n_lambda = spec.n_lambda;
    options.lambda_ratio = spec.lambda_ratio;
    return std::make_unique<CvLassoSelector>(options);
  }
  throw Error(ErrorCode::invalid_argument, "unknown selector '" + spec.kind + "'");
}

}  // namespace ssglm
