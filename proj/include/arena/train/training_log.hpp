#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arena/sim/game.hpp"
#include "arena/train/schedule.hpp"

namespace arena {

/// One pretraining epoch.
struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
  double learning_rate = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

/// One hybrid-training episode. Offline episodes have no game, so length,
/// reward and outcome stay at their defaults and `loss` is the imitation loss.
struct EpisodeRecord {
  int episode = 0;
  EpisodeMode mode = EpisodeMode::Online;
  int length = 0;
  double reward_sum = 0.0;
  Outcome outcome = Outcome::Ongoing;
  double loss = 0.0;  // mean over the updates made during the episode; 0 if none
  int updates = 0;
  double epsilon = 0.0;
  double learning_rate = 0.0;

  bool won() const { return outcome == Outcome::Win; }
  bool operator==(const EpisodeRecord&) const = default;
};

/// Append-only. Epoch and episode indices must each be contiguous from 0.
class TrainingLog {
 public:
  /// Throws std::invalid_argument on a gap or repeat in the index.
  void add(const EpochRecord& record);
  void add(const EpisodeRecord& record);

  const std::vector<EpochRecord>& epochs() const { return epochs_; }
  const std::vector<EpisodeRecord>& episodes() const { return episodes_; }

  /// Online episodes only, in training order.
  std::vector<EpisodeRecord> online_episodes() const;

  /// One JSON object per line, tagged with "kind": "epoch" or "episode".
  std::string to_jsonl() const;
  /// Throws IoError naming the offending line.
  static TrainingLog from_jsonl(const std::string& text, const std::string& source = "log");

  void write(const std::filesystem::path& path) const;
  static TrainingLog read(const std::filesystem::path& path);

  bool operator==(const TrainingLog&) const = default;

 private:
  std::vector<EpochRecord> epochs_;
  std::vector<EpisodeRecord> episodes_;
};

}  // namespace arena
