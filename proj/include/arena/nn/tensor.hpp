#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace arena::nn {

/// Row-major double matrix; a single row doubles as a vector.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A trainable tensor with its gradient accumulator (same shape).
struct Parameter {
  std::string name;
  Tensor2 value;
  Tensor2 grad;

  Parameter() = default;
  Parameter(std::string n, Tensor2 v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor2::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
};

using ParameterList = std::vector<Parameter*>;

/// Throws std::invalid_argument unless the shapes agree.
void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, const char* what);

bool all_finite(const Tensor2& t);

}  // namespace arena::nn
