#include "arena/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace arena::nn {

LossAndGrad softmax_cross_entropy(std::span<const double> logits, int target) {
  if (target < 0 || target >= static_cast<int>(logits.size())) {
    throw std::invalid_argument("cross entropy target " + std::to_string(target) +
                                " out of range for " + std::to_string(logits.size()) + " classes");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double log_sum = std::log(sum);
  LossAndGrad out;
  out.loss = -(logits[target] - m - log_sum);
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(logits[i] - m - log_sum);
  out.grad[target] -= 1.0;
  return out;
}

BatchLoss softmax_cross_entropy(const Tensor2& logits, std::span<const int> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) {
    throw std::invalid_argument("cross entropy: one target per row required");
  }
  BatchLoss out;
  out.grad.resize(logits.rows(), logits.cols());
  if (logits.rows() == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const auto row = std::span<const double>(logits.row(r).data(), logits.cols());
    const LossAndGrad lg = softmax_cross_entropy(row, targets[r]);
    out.loss += lg.loss * inv_n;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) out.grad(r, c) = lg.grad[c] * inv_n;
  }
  return out;
}

ScalarLoss huber(double prediction, double target, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber delta must be positive");
  const double e = prediction - target;
  const double a = std::abs(e);
  if (a <= delta) return {0.5 * e * e, e};
  return {delta * (a - 0.5 * delta), e > 0 ? delta : -delta};
}

}  // namespace arena::nn
