#pragma once

#include <string>

#include "arena/nn/tensor.hpp"
#include "arena/rng.hpp"

namespace arena::nn {

// ---------------------------------------------------------------------------
// Dense: y = x W + b, W is in x out.

struct DenseGrads {
  Tensor2 weight;
  Tensor2 bias;
  Tensor2 input;
};

Tensor2 dense_forward(const Tensor2& weight, const Tensor2& bias, const Tensor2& input);
DenseGrads dense_backward(const Tensor2& weight, const Tensor2& input, const Tensor2& grad_out);

class Dense {
 public:
  Dense() = default;
  /// Kaiming-uniform weights (bound scale * sqrt(6 / fan_in)), zero bias.
  Dense(const std::string& name, int in, int out, Rng& rng, double scale = 1.0);

  int in_features() const { return static_cast<int>(weight.value.rows()); }
  int out_features() const { return static_cast<int>(weight.value.cols()); }

  Tensor2 forward(const Tensor2& input) const;
  /// Accumulates parameter gradients and returns the gradient wrt input.
  Tensor2 backward(const Tensor2& input, const Tensor2& grad_out);

  ParameterList parameters() { return {&weight, &bias}; }

  Parameter weight;
  Parameter bias;
};

// ---------------------------------------------------------------------------
// Row-wise layer normalization.

struct LayerNormCache {
  Tensor2 normalized;           // (x - mean) / sqrt(var + eps)
  Eigen::VectorXd inv_std;      // per row
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, int width, double epsilon = 1e-5);

  int width() const { return static_cast<int>(gain.value.cols()); }
  double epsilon() const { return epsilon_; }

  Tensor2 forward(const Tensor2& input, LayerNormCache* cache = nullptr) const;
  Tensor2 backward(const LayerNormCache& cache, const Tensor2& grad_out);

  ParameterList parameters() { return {&gain, &shift}; }

  Parameter gain;
  Parameter shift;

 private:
  double epsilon_ = 1e-5;
};

// ---------------------------------------------------------------------------
// LeakyReLU.

inline constexpr double kDefaultLeakySlope = 0.01;

Tensor2 leaky_relu(const Tensor2& x, double slope = kDefaultLeakySlope);
Tensor2 leaky_relu_backward(const Tensor2& x, const Tensor2& grad_out,
                            double slope = kDefaultLeakySlope);

// ---------------------------------------------------------------------------
// Softmax (row-wise, max-subtracted).

Tensor2 softmax_rows(const Tensor2& logits);

}  // namespace arena::nn
