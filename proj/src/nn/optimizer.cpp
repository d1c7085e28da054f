#include "arena/nn/optimizer.hpp"

#include <cmath>

#include "arena/errors.hpp"

namespace arena::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("optimizer: learning_rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ConfigError("optimizer: decay_factor must be in (0, 1]");
  }
  if (decay_every <= 0) throw ConfigError("optimizer: decay_every must be positive");
  if (kind == OptimizerKind::Adam &&
      !(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw ConfigError("optimizer: invalid Adam coefficients");
  }
}

double effective_learning_rate(const OptimizerConfig& config, long step) {
  return config.learning_rate * std::pow(config.decay_factor, static_cast<double>(step / config.decay_every));
}

Optimizer::Optimizer(OptimizerConfig config, ParameterList params, std::string label)
    : config_(config), params_(std::move(params)), label_(std::move(label)) {
  config_.validate();
  for (const Parameter* p : params_) {
    first_moment_.push_back(Tensor2::Zero(p->value.rows(), p->value.cols()));
    second_moment_.push_back(Tensor2::Zero(p->value.rows(), p->value.cols()));
  }
}

void Optimizer::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Optimizer::step() {
  double norm2 = 0.0;
  for (const Parameter* p : params_) {
    require_shape(p->grad, p->value.rows(), p->value.cols(), "optimizer gradient");
    if (!p->grad.allFinite()) {
      throw TrainingError(label_ + ": non-finite gradient in '" + p->name + "' at step " +
                          std::to_string(steps_) + " (max |g| = " +
                          std::to_string(p->grad.cwiseAbs().maxCoeff()) + ")");
    }
    norm2 += p->grad.squaredNorm();
  }
  double clip = 1.0;
  if (config_.max_grad_norm > 0.0 && norm2 > config_.max_grad_norm * config_.max_grad_norm) {
    clip = config_.max_grad_norm / std::sqrt(norm2);
  }

  const double lr = effective_learning_rate(config_, steps_);
  ++steps_;
  if (config_.kind == OptimizerKind::Sgd) {
    for (Parameter* p : params_) p->value -= (lr * clip) * p->grad;
    return;
  }
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter* p = params_[i];
    Tensor2& m = first_moment_[i];
    Tensor2& v = second_moment_[i];
    m = config_.beta1 * m + (1.0 - config_.beta1) * clip * p->grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * (clip * p->grad).cwiseAbs2();
    p->value.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace arena::nn
