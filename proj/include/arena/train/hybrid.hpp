#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "arena/agents/policy.hpp"
#include "arena/nn/optimizer.hpp"
#include "arena/rewards/rewards.hpp"
#include "arena/train/learners.hpp"
#include "arena/train/schedule.hpp"
#include "arena/train/training_log.hpp"

namespace arena {

struct PretrainResult {
  TrainingLog log;
  PolicyModel best;
  int best_epoch = -1;  // -1 when no epoch improved on the initial weights
  double best_validation_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs `epochs` behavior-cloning epochs and keeps the weights with the
/// lowest validation loss seen, including the initial ones. Training runs to
/// completion; `model` ends with the last epoch's weights.
PretrainResult run_pretraining(PolicyModel& model, const EncodedDemos& train,
                               const EncodedDemos& validation, int epochs, const BcConfig& bc,
                               const nn::OptimizerConfig& optimizer, std::uint64_t seed,
                               const EpochCallback& on_epoch = {});

enum class RewardKind { Basic, Advanced };

RewardKind parse_reward_kind(const std::string& text);
std::string to_string(RewardKind kind);

struct HybridConfig {
  HybridSchedule schedule;
  DqnConfig dqn;
  /// Each offline episode is batches_per_epoch resampled batches.
  BcConfig offline{512, 8, true};
  nn::OptimizerConfig optimizer;
  RewardKind reward = RewardKind::Advanced;
  RewardWeights weights;
  GameConfig game;
  /// Online episode i plays arena seed + i.
  std::uint64_t seed = 0;

  void validate() const;
};

using EpisodeCallback = std::function<void(const EpisodeRecord&, const PolicyModel&)>;

/// Interleaves offline imitation episodes with online DQN episodes against
/// `opponent` per the phase plan. The agent controls the player; the
/// opponent controls every enemy.
///
/// On a non-finite loss or output the model is restored to the weights at the
/// end of the last completed episode and TrainingError is rethrown.
TrainingLog run_hybrid_training(PolicyModel& model, const EncodedDemos& demos, Policy& opponent,
                                const HybridConfig& config, const EpisodeCallback& on_episode = {});

}  // namespace arena
