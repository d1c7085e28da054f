#pragma once

#include <functional>
#include <string>

#include "arena/nn/tensor.hpp"

namespace arena::nn {

struct GradCheckResult {
  double max_error = 0.0;
  std::string worst_parameter;
  long checked = 0;

  bool passed(double tolerance = 1e-4) const { return max_error <= tolerance; }
};

/// Compares analytic gradients against central differences
/// (f(x + eps) - f(x - eps)) / 2 eps for every element of every parameter.
///
/// `loss` evaluates the scalar objective at the current parameter values.
/// `compute_gradients` must zero and then fill each parameter's grad.
/// The error per element is relative to the numeric reference, or absolute
/// when |reference| < 1e-6.
GradCheckResult grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_gradients,
                           const ParameterList& params, double eps = 1e-5);

}  // namespace arena::nn
