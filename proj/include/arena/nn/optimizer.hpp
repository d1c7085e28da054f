#pragma once

#include <string>
#include <vector>

#include "arena/nn/tensor.hpp"

namespace arena::nn {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  double learning_rate = 0.001;
  double decay_factor = 0.5;
  long decay_every = 50000;  // optimizer steps
  OptimizerKind kind = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; non-positive disables clipping.
  double max_grad_norm = 0.0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// learning_rate * decay_factor ^ floor(step / decay_every)
double effective_learning_rate(const OptimizerConfig& config, long step);

/// Descent over a fixed parameter set. Several optimizers may share
/// parameters; each keeps its own moment estimates.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, ParameterList params, std::string label = "optimizer");

  void zero_grad();
  /// Applies one update from the accumulated gradients. Throws TrainingError
  /// naming the offending tensor if any gradient is non-finite; parameters are
  /// left untouched in that case.
  void step();

  long steps() const { return steps_; }
  double current_learning_rate() const { return effective_learning_rate(config_, steps_); }
  const OptimizerConfig& config() const { return config_; }
  const ParameterList& parameters() const { return params_; }

 private:
  OptimizerConfig config_;
  ParameterList params_;
  std::string label_;
  std::vector<Tensor2> first_moment_;
  std::vector<Tensor2> second_moment_;
  long steps_ = 0;
};

}  // namespace arena::nn
