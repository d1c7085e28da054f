#include "arena/nn/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace arena::nn {

void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if ((rows >= 0 && t.rows() != rows) || (cols >= 0 && t.cols() != cols)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch, got " +
                                std::to_string(t.rows()) + "x" + std::to_string(t.cols()) +
                                ", expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

bool all_finite(const Tensor2& t) { return t.allFinite(); }

Tensor2 dense_forward(const Tensor2& weight, const Tensor2& bias, const Tensor2& input) {
  require_shape(input, -1, weight.rows(), "dense input");
  require_shape(bias, 1, weight.cols(), "dense bias");
  Tensor2 out = input * weight;
  out.rowwise() += bias.row(0);
  return out;
}

DenseGrads dense_backward(const Tensor2& weight, const Tensor2& input, const Tensor2& grad_out) {
  require_shape(input, -1, weight.rows(), "dense input");
  require_shape(grad_out, input.rows(), weight.cols(), "dense upstream gradient");
  DenseGrads g;
  g.weight = input.transpose() * grad_out;
  g.bias = grad_out.colwise().sum();
  g.input = grad_out * weight.transpose();
  return g;
}

Dense::Dense(const std::string& name, int in, int out, Rng& rng, double scale) {
  const double bound = scale * std::sqrt(6.0 / in);
  Tensor2 w(in, out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  weight = Parameter(name + ".weight", std::move(w));
  bias = Parameter(name + ".bias", Tensor2::Zero(1, out));
}

Tensor2 Dense::forward(const Tensor2& input) const {
  return dense_forward(weight.value, bias.value, input);
}

Tensor2 Dense::backward(const Tensor2& input, const Tensor2& grad_out) {
  require_shape(grad_out, input.rows(), out_features(), "dense upstream gradient");
  weight.grad.noalias() += input.transpose() * grad_out;
  bias.grad += grad_out.colwise().sum();
  return grad_out * weight.value.transpose();
}

LayerNorm::LayerNorm(const std::string& name, int width, double epsilon) : epsilon_(epsilon) {
  gain = Parameter(name + ".gain", Tensor2::Ones(1, width));
  shift = Parameter(name + ".shift", Tensor2::Zero(1, width));
}

Tensor2 LayerNorm::forward(const Tensor2& input, LayerNormCache* cache) const {
  require_shape(input, -1, width(), "layer_norm input");
  const Eigen::Index n = input.cols();
  Tensor2 xhat(input.rows(), n);
  Eigen::VectorXd inv_std(input.rows());
  for (Eigen::Index r = 0; r < input.rows(); ++r) {
    const double mean = input.row(r).mean();
    const auto centered = input.row(r).array() - mean;
    const double var = centered.square().sum() / static_cast<double>(n);
    inv_std(r) = 1.0 / std::sqrt(var + epsilon_);
    xhat.row(r) = centered * inv_std(r);
  }
  Tensor2 out = xhat.array().rowwise() * gain.value.row(0).array();
  out.rowwise() += shift.value.row(0);
  if (cache != nullptr) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

Tensor2 LayerNorm::backward(const LayerNormCache& cache, const Tensor2& grad_out) {
  const Tensor2& xhat = cache.normalized;
  require_shape(grad_out, xhat.rows(), xhat.cols(), "layer_norm upstream gradient");
  const double n = static_cast<double>(xhat.cols());
  gain.grad += (grad_out.array() * xhat.array()).colwise().sum().matrix();
  shift.grad += grad_out.colwise().sum();
  const Tensor2 dxhat = grad_out.array().rowwise() * gain.value.row(0).array();
  Tensor2 dx(xhat.rows(), xhat.cols());
  for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
    const double sum_d = dxhat.row(r).sum();
    const double sum_dx = dxhat.row(r).dot(xhat.row(r));
    dx.row(r) = (cache.inv_std(r) / n) *
                (n * dxhat.row(r).array() - sum_d - xhat.row(r).array() * sum_dx);
  }
  return dx;
}

Tensor2 leaky_relu(const Tensor2& x, double slope) {
  return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

Tensor2 leaky_relu_backward(const Tensor2& x, const Tensor2& grad_out, double slope) {
  require_shape(grad_out, x.rows(), x.cols(), "leaky_relu upstream gradient");
  return grad_out.binaryExpr(x, [slope](double g, double v) { return v >= 0.0 ? g : slope * g; });
}

Tensor2 softmax_rows(const Tensor2& logits) {
  Tensor2 out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace arena::nn
