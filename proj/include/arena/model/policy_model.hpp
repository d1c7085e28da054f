#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "arena/agents/policy.hpp"
#include "arena/model/encoder.hpp"
#include "arena/nn/attention.hpp"
#include "arena/nn/checkpoint.hpp"
#include "arena/nn/layers.hpp"
#include "arena/sim/actions.hpp"

namespace arena {

enum class ModelPreset { Small, Large };

ModelPreset parse_model_preset(const std::string& text);
std::string to_string(ModelPreset preset);

struct ModelConfig {
  int embed_dim = 32;
  std::vector<int> trunk = {64, 64};
  int heads = 2;
  double leaky_slope = nn::kDefaultLeakySlope;

  static ModelConfig preset(ModelPreset preset);
  /// Throws ConfigError.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Dense, then LayerNorm, then LeakyReLU.
struct DenseBlockCache {
  nn::Tensor2 input;
  nn::LayerNormCache norm;
  nn::Tensor2 normalized_out;
};

class DenseBlock {
 public:
  DenseBlock() = default;
  DenseBlock(const std::string& name, int in, int out, double slope, Rng& rng);

  nn::Tensor2 forward(const nn::Tensor2& input, DenseBlockCache* cache = nullptr) const;
  nn::Tensor2 backward(const DenseBlockCache& cache, const nn::Tensor2& grad_out);
  nn::ParameterList parameters();

  nn::Dense dense;
  nn::LayerNorm norm;
  double slope = nn::kDefaultLeakySlope;
};

using FeatureBatch = std::span<const EntityFeatureSet* const>;

struct ModelCache {
  int batch = 0;
  DenseBlockCache player;
  std::array<DenseBlockCache, 3> typed;  // enemy, bullet, wall
  std::array<int, 3> typed_rows{};
  /// For each stacked key row: entity type and row within that type's block.
  std::vector<std::pair<int, int>> key_source;
  nn::AttentionCache attention;
  std::vector<DenseBlockCache> trunk;
};

/// Shared entity-attention trunk with a Q-value head and an imitation head.
///
/// Each present entity is embedded by its type's block, tagged with a learned
/// type vector, and attended to by the player embedding. Padded entities are
/// never materialized, so they cannot influence any output.
class PolicyModel {
 public:
  PolicyModel(ModelConfig config, EncoderLimits limits, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const EncoderLimits& limits() const { return limits_; }
  int feature_width() const { return config_.trunk.back(); }

  /// Trunk output, one row per batch element.
  nn::Tensor2 features(FeatureBatch batch, ModelCache* cache = nullptr) const;
  /// Accumulates shared-parameter gradients from d(loss)/d(features).
  void backward_features(const ModelCache& cache, const nn::Tensor2& grad);

  /// Both heads throw ModelError naming non-finite parameters when the output
  /// is not finite.
  nn::Tensor2 q_values(FeatureBatch batch) const;
  nn::Tensor2 imitation_logits(FeatureBatch batch) const;

  std::array<double, kNumActions> q_values(const EntityFeatureSet& f) const;
  std::array<double, kNumActions> imitation_probabilities(const EntityFeatureSet& f) const;

  nn::ParameterList shared_parameters();
  nn::ParameterList q_head_parameters() { return q_head.parameters(); }
  nn::ParameterList imitation_head_parameters() { return imitation_head.parameters(); }
  nn::ParameterList all_parameters();
  void zero_grad();

  /// Hash over every parameter value; equal iff weights are bit-identical.
  std::uint64_t checksum() const;

  nn::Dense q_head;
  nn::Dense imitation_head;

 private:
  void require_finite_output(const nn::Tensor2& out, const char* head) const;

  ModelConfig config_;
  EncoderLimits limits_;
  DenseBlock player_block_;
  std::array<DenseBlock, 3> typed_blocks_;
  std::array<nn::Parameter, 3> type_tags_;
  nn::MultiHeadAttention attention_;
  std::vector<DenseBlock> trunk_;
};

/// Highest value; ties resolve to the lowest index. Throws
/// std::invalid_argument on non-finite input.
int select_greedy(std::span<const double> values);
/// With probability epsilon a uniform action, else select_greedy.
int select_epsilon(std::span<const double> values, double epsilon, Rng& rng);

enum class PolicyHead { Q, Imitation };

/// Acts with a model head. Greedy unless epsilon > 0.
class ModelPolicy : public Policy {
 public:
  ModelPolicy(const PolicyModel& model, PolicyHead head = PolicyHead::Q, double epsilon = 0.0,
              std::string name = "Model");
  int act(const Observation& obs, Rng& rng) override;
  std::string name() const override { return name_; }

 private:
  const PolicyModel* model_;
  PolicyHead head_;
  double epsilon_;
  std::string name_;
};

/// Weights plus model config, encoder limits and the game fingerprint.
nn::Checkpoint to_checkpoint(const PolicyModel& model, const std::string& fingerprint);
/// Throws ModelError when tensors are missing, extra or mis-shaped.
PolicyModel model_from_checkpoint(const nn::Checkpoint& checkpoint);

void save_model(const std::filesystem::path& path, const PolicyModel& model,
                const std::string& fingerprint);
/// Throws ModelError when expected_fingerprint is non-empty and differs.
PolicyModel load_model(const std::filesystem::path& path,
                       const std::string& expected_fingerprint = {});

}  // namespace arena
