#include "arena/nn/gradcheck.hpp"

#include <cmath>

namespace arena::nn {

GradCheckResult grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_gradients,
                           const ParameterList& params, double eps) {
  compute_gradients();
  std::vector<Tensor2> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter* p = params[i];
    for (Eigen::Index j = 0; j < p->value.size(); ++j) {
      double& x = p->value.data()[j];
      const double saved = x;
      x = saved + eps;
      const double up = loss();
      x = saved - eps;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double diff = std::abs(analytic[i].data()[j] - numeric);
      const double err = std::abs(numeric) < 1e-6 ? diff : diff / std::abs(numeric);
      ++result.checked;
      if (err > result.max_error || std::isnan(err)) {
        result.max_error = std::isnan(err) ? INFINITY : err;
        result.worst_parameter = p->name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return result;
}

}  // namespace arena::nn
