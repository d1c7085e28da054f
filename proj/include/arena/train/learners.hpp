#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "arena/data/dataset.hpp"
#include "arena/model/policy_model.hpp"
#include "arena/nn/optimizer.hpp"
#include "arena/train/replay_buffer.hpp"

namespace arena {

/// Demonstrations encoded once up front.
struct EncodedDemos {
  std::vector<EntityFeatureSet> features;
  std::vector<int> actions;

  std::size_t size() const { return actions.size(); }
};

EncodedDemos encode_demos(const std::vector<DemoSample>& samples, const EncoderLimits& limits);

// ---------------------------------------------------------------------------
// Behavior cloning: cross-entropy through the imitation head and shared trunk.

struct BcConfig {
  int batch_size = 512;
  /// 0 means ceil(training samples / batch_size).
  int batches_per_epoch = 0;
  /// Class-balanced sampling; validation metrics never use weights.
  bool balanced = true;

  void validate() const;
};

struct ImitationMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Unweighted mean cross-entropy and argmax accuracy over every sample.
ImitationMetrics evaluate_imitation(const PolicyModel& model, const EncodedDemos& demos);

/// Fraction of the most common action; the accuracy of a constant predictor.
double majority_baseline(const EncodedDemos& demos);

/// Optimizer over the imitation head and the shared parameters.
nn::Optimizer make_bc_optimizer(PolicyModel& model, const nn::OptimizerConfig& config);
/// Optimizer over the Q head and the shared parameters.
nn::Optimizer make_dqn_optimizer(PolicyModel& model, const nn::OptimizerConfig& config);

/// One gradient step on the given rows. Returns the batch loss (before the
/// step). Never touches the Q head.
double bc_update(PolicyModel& model, const EncodedDemos& demos, std::span<const std::size_t> rows,
                 nn::Optimizer& optimizer);

/// Draws training rows, balanced by action when requested.
class DemoSampler {
 public:
  DemoSampler(const EncodedDemos& demos, bool balanced);
  std::size_t sample(Rng& rng) const;
  std::vector<std::size_t> batch(std::size_t n, Rng& rng) const;

 private:
  WeightedSampler sampler_;
};

/// Returns the mean training loss over the epoch's batches.
double bc_epoch(PolicyModel& model, const EncodedDemos& train, const BcConfig& config,
                nn::Optimizer& optimizer, Rng& rng);

// ---------------------------------------------------------------------------
// DQN with a hard-synced target network.

struct DqnConfig {
  double gamma = 0.99;
  double epsilon_start = 0.8;
  double epsilon_end = 0.1;
  /// Epsilon reaches epsilon_end after this fraction of the online episodes.
  double epsilon_decay_fraction = 0.7;
  int target_sync_interval = 500;  // optimizer steps
  int batch_size = 64;
  int warmup = 1000;  // transitions before the first update
  std::size_t buffer_capacity = kDefaultReplayCapacity;
  double huber_delta = 1.0;

  void validate() const;
  bool operator==(const DqnConfig&) const = default;
};

/// Epsilon for the given online episode out of `online_total`.
double epsilon_for_episode(const DqnConfig& config, long online_episode, long online_total);

/// r for terminal transitions, else r + gamma * max_next_q.
double td_target(double reward, bool terminal, double max_next_q, double gamma);

/// Bootstrapped targets using the target network for the next states.
/// Throws TrainingError on a non-finite target.
std::vector<double> q_targets(std::span<const Transition* const> batch, const PolicyModel& target,
                              double gamma);

/// One Huber-loss step on a fixed batch through the Q head and the shared
/// trunk. Returns the loss before the step. Never touches the imitation head.
double dqn_update(PolicyModel& model, const PolicyModel& target,
                  std::span<const Transition* const> batch, const DqnConfig& config,
                  nn::Optimizer& optimizer);

/// Samples a batch and calls dqn_update, then copies the weights into
/// `target` whenever the optimizer step count reaches a multiple of the sync
/// interval. Throws TrainingError before warmup or on a non-finite loss.
double dqn_step(PolicyModel& model, PolicyModel& target, const ReplayBuffer& buffer,
                const DqnConfig& config, nn::Optimizer& optimizer, Rng& rng);

}  // namespace arena
