#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arena/nn/layers.hpp"

namespace arena::nn {

/// Intermediate values from a batched forward pass, needed by backward.
struct AttentionCache {
  Tensor2 queries_in;
  Tensor2 keys_in;
  Tensor2 values_in;
  Tensor2 q;  // N x d projected queries
  Tensor2 k;  // M x d projected keys
  Tensor2 v;  // M x d projected values
  Tensor2 weights;  // M x heads, softmax weight of each key within its segment
  Tensor2 context;  // N x d concatenated heads, pre-projection
  std::vector<int> offsets;
};

struct AttentionGrads {
  Tensor2 queries;
  Tensor2 keys;
  Tensor2 values;
};

/// Scaled dot-product attention with `heads` heads, learned query/key/value
/// projections and an output projection.
///
/// The batched form takes N queries and M stacked keys/values; query i attends
/// to rows [offsets[i], offsets[i+1]). An empty range yields a zero output
/// row, so padded entities never need to be materialized.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  /// Throws ConfigError when dim is not divisible by heads.
  MultiHeadAttention(const std::string& name, int dim, int heads, Rng& rng);

  int dim() const { return dim_; }
  int heads() const { return heads_; }

  Tensor2 forward(const Tensor2& queries, const Tensor2& keys, const Tensor2& values,
                  std::span<const int> offsets, AttentionCache* cache = nullptr) const;
  AttentionGrads backward(const AttentionCache& cache, const Tensor2& grad_out);

  /// Single query (1 x d) over n keys/values with a presence mask; masked rows
  /// are excluded before scoring. All-masked input returns zeros.
  Tensor2 forward_masked(const Tensor2& query, const Tensor2& keys, const Tensor2& values,
                         std::span<const std::uint8_t> mask, AttentionCache* cache = nullptr) const;

  ParameterList parameters();

  Dense query_proj;
  Dense key_proj;
  Dense value_proj;
  Dense output_proj;

 private:
  int dim_ = 0;
  int heads_ = 1;
};

}  // namespace arena::nn
