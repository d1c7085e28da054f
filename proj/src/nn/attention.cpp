#include "arena/nn/attention.hpp"

#include <cmath>
#include <stdexcept>

#include "arena/errors.hpp"

namespace arena::nn {

MultiHeadAttention::MultiHeadAttention(const std::string& name, int dim, int heads, Rng& rng)
    : dim_(dim), heads_(heads) {
  if (heads <= 0 || dim <= 0 || dim % heads != 0) {
    throw ConfigError("attention: dim " + std::to_string(dim) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  query_proj = Dense(name + ".query", dim, dim, rng);
  key_proj = Dense(name + ".key", dim, dim, rng);
  value_proj = Dense(name + ".value", dim, dim, rng);
  output_proj = Dense(name + ".output", dim, dim, rng);
}

ParameterList MultiHeadAttention::parameters() {
  ParameterList out;
  for (Dense* d : {&query_proj, &key_proj, &value_proj, &output_proj}) {
    for (Parameter* p : d->parameters()) out.push_back(p);
  }
  return out;
}

Tensor2 MultiHeadAttention::forward(const Tensor2& queries, const Tensor2& keys,
                                    const Tensor2& values, std::span<const int> offsets,
                                    AttentionCache* cache) const {
  const Eigen::Index n = queries.rows();
  const Eigen::Index m = keys.rows();
  require_shape(queries, -1, dim_, "attention queries");
  require_shape(keys, -1, dim_, "attention keys");
  require_shape(values, m, dim_, "attention values");
  if (static_cast<Eigen::Index>(offsets.size()) != n + 1 || offsets.front() != 0 ||
      offsets.back() != m) {
    throw std::invalid_argument("attention: offsets do not partition the key rows");
  }

  const int head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Tensor2 q = query_proj.forward(queries);
  Tensor2 k = m > 0 ? key_proj.forward(keys) : Tensor2(0, dim_);
  Tensor2 v = m > 0 ? value_proj.forward(values) : Tensor2(0, dim_);
  Tensor2 weights(m, heads_);
  Tensor2 context = Tensor2::Zero(n, dim_);

  for (Eigen::Index i = 0; i < n; ++i) {
    const int begin = offsets[i];
    const int count = offsets[i + 1] - begin;
    if (count < 0) throw std::invalid_argument("attention: offsets must be non-decreasing");
    if (count == 0) continue;
    for (int h = 0; h < heads_; ++h) {
      const int c0 = h * head_dim;
      auto scores = weights.block(begin, h, count, 1);
      scores.noalias() = k.block(begin, c0, count, head_dim) *
                         q.block(i, c0, 1, head_dim).transpose() * scale;
      scores.array() -= scores.maxCoeff();
      scores = scores.array().exp().matrix();
      scores /= scores.sum();
      context.block(i, c0, 1, head_dim).noalias() =
          scores.transpose() * v.block(begin, c0, count, head_dim);
    }
  }

  Tensor2 out = output_proj.forward(context);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (offsets[i + 1] == offsets[i]) out.row(i).setZero();
  }
  if (cache != nullptr) {
    cache->queries_in = queries;
    cache->keys_in = keys;
    cache->values_in = values;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->weights = std::move(weights);
    cache->context = std::move(context);
    cache->offsets.assign(offsets.begin(), offsets.end());
  }
  return out;
}

AttentionGrads MultiHeadAttention::backward(const AttentionCache& cache, const Tensor2& grad_out) {
  const Eigen::Index n = cache.q.rows();
  const Eigen::Index m = cache.k.rows();
  require_shape(grad_out, n, dim_, "attention upstream gradient");
  const int head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Tensor2 g = grad_out;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cache.offsets[i + 1] == cache.offsets[i]) g.row(i).setZero();
  }
  const Tensor2 dcontext = output_proj.backward(cache.context, g);

  Tensor2 dq = Tensor2::Zero(n, dim_);
  Tensor2 dk = Tensor2::Zero(m, dim_);
  Tensor2 dv = Tensor2::Zero(m, dim_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int begin = cache.offsets[i];
    const int count = cache.offsets[i + 1] - begin;
    if (count == 0) continue;
    for (int h = 0; h < heads_; ++h) {
      const int c0 = h * head_dim;
      const auto a = cache.weights.block(begin, h, count, 1);
      const auto dctx = dcontext.block(i, c0, 1, head_dim);
      dv.block(begin, c0, count, head_dim).noalias() += a * dctx;
      const Eigen::VectorXd da = cache.v.block(begin, c0, count, head_dim) * dctx.transpose();
      const double mean_da = a.col(0).dot(da);
      const Eigen::VectorXd ds = (a.col(0).array() * (da.array() - mean_da)).matrix() * scale;
      dq.block(i, c0, 1, head_dim).noalias() +=
          ds.transpose() * cache.k.block(begin, c0, count, head_dim);
      dk.block(begin, c0, count, head_dim).noalias() += ds * cache.q.block(i, c0, 1, head_dim);
    }
  }

  AttentionGrads grads;
  grads.queries = query_proj.backward(cache.queries_in, dq);
  if (m > 0) {
    grads.keys = key_proj.backward(cache.keys_in, dk);
    grads.values = value_proj.backward(cache.values_in, dv);
  } else {
    grads.keys = Tensor2(0, dim_);
    grads.values = Tensor2(0, dim_);
  }
  return grads;
}

Tensor2 MultiHeadAttention::forward_masked(const Tensor2& query, const Tensor2& keys,
                                           const Tensor2& values, std::span<const std::uint8_t> mask,
                                           AttentionCache* cache) const {
  require_shape(query, 1, dim_, "attention query");
  require_shape(keys, static_cast<Eigen::Index>(mask.size()), dim_, "attention keys");
  require_shape(values, keys.rows(), dim_, "attention values");
  std::vector<Eigen::Index> rows;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) rows.push_back(static_cast<Eigen::Index>(j));
  }
  Tensor2 k(static_cast<Eigen::Index>(rows.size()), dim_);
  Tensor2 v(static_cast<Eigen::Index>(rows.size()), dim_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    k.row(static_cast<Eigen::Index>(r)) = keys.row(rows[r]);
    v.row(static_cast<Eigen::Index>(r)) = values.row(rows[r]);
  }
  const int offsets[2] = {0, static_cast<int>(rows.size())};
  return forward(query, k, v, offsets, cache);
}

}  // namespace arena::nn
