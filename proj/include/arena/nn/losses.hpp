#pragma once

#include <span>
#include <vector>

#include "arena/nn/tensor.hpp"

namespace arena::nn {

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// -log softmax(logits)[target]; grad = softmax - one_hot(target).
/// Throws std::invalid_argument for an out-of-range target.
LossAndGrad softmax_cross_entropy(std::span<const double> logits, int target);

/// Mean cross-entropy over rows; the returned gradient is already divided by
/// the row count.
struct BatchLoss {
  double loss = 0.0;
  Tensor2 grad;
};
BatchLoss softmax_cross_entropy(const Tensor2& logits, std::span<const int> targets);

struct ScalarLoss {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d prediction
};

/// Quadratic within delta of the target, linear outside.
ScalarLoss huber(double prediction, double target, double delta = 1.0);

}  // namespace arena::nn
