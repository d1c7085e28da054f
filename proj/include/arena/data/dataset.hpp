#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arena/agents/policy.hpp"
#include "arena/rng.hpp"
#include "arena/sim/actions.hpp"
#include "arena/sim/game.hpp"

namespace arena {

inline constexpr int kDatasetVersion = 1;
inline constexpr const char* kDatasetSchema = "arena-demos";

/// One recorded decision. Within (episode, agent) ticks strictly increase.
struct DemoSample {
  Observation observation;
  int action = 0;
  int episode = 0;
  EntityId agent = 0;
  int tick = 0;

  bool operator==(const DemoSample&) const = default;
};

struct DemoDataset {
  int version = kDatasetVersion;
  std::string fingerprint;
  GameConfig config;
  std::vector<std::string> sources;
  std::vector<DemoSample> samples;

  /// Distinct episode ids in ascending order.
  std::vector<int> episodes() const;
  bool operator==(const DemoDataset&) const = default;
};

using ActionHistogram = std::array<long, kNumActions>;
using ActionWeights = std::array<double, kNumActions>;

/// Plays n_episodes of `player` against `enemy` (which controls every enemy)
/// and records each live agent's observation and action every tick. Episode i
/// uses arena seed seed + i. Throws std::invalid_argument for n_episodes < 1.
DemoDataset record_demos(Policy& player, Policy& enemy, int n_episodes, const GameConfig& config,
                         std::uint64_t seed);

ActionHistogram action_histogram(const DemoDataset& dataset);
ActionHistogram action_histogram(const std::vector<DemoSample>& samples);
ActionHistogram action_histogram(std::span<const int> actions);

/// Inverse-frequency weights over present actions, summing to 1. Throws
/// std::invalid_argument when every count is zero.
ActionWeights balanced_weights(const ActionHistogram& histogram);

/// Draws sample i with probability proportional to weights[action of i].
/// With balanced_weights every present action is equally likely.
class WeightedSampler {
 public:
  WeightedSampler(const std::vector<DemoSample>& samples, const ActionWeights& weights);
  WeightedSampler(std::span<const int> actions, const ActionWeights& weights);
  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return total_; }

 private:
  void finish(const ActionWeights& weights);

  std::array<std::vector<std::size_t>, kNumActions> by_action_;
  std::array<double, kNumActions> cumulative_{};
  std::size_t total_ = 0;
};

/// Splits by whole episodes. The validation side gets round(fraction * n)
/// episodes, at least 1 and at most n - 1. Throws std::invalid_argument for
/// fewer than 2 episodes or a fraction outside (0, 1).
std::pair<DemoDataset, DemoDataset> split_dataset(const DemoDataset& dataset,
                                                  double validation_fraction, std::uint64_t seed);

/// JSON-lines: one header record, then one record per sample. Written to a
/// temporary file and renamed into place. Throws IoError.
void save_dataset(const std::filesystem::path& path, const DemoDataset& dataset);
/// Throws IoError naming the offending line; never returns a partial dataset.
DemoDataset load_dataset(const std::filesystem::path& path);

}  // namespace arena
