#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "arena/model/policy_model.hpp"
#include "arena/nn/optimizer.hpp"
#include "arena/rewards/rewards.hpp"
#include "arena/sim/config.hpp"
#include "arena/train/hybrid.hpp"

namespace arena {

struct CollectSettings {
  int episodes = 200;
  std::string player = "rule";
  std::string enemy = "rule2";
  bool operator==(const CollectSettings&) const = default;
};

struct PretrainSettings {
  int epochs = 300;
  double validation_fraction = 0.2;
  BcConfig bc;
  bool operator==(const PretrainSettings&) const = default;
};

struct EvalSettings {
  int episodes = 100;
  std::uint64_t seed = 100000;
  bool operator==(const EvalSettings&) const = default;
};

struct PlaySettings {
  int port = 8765;
  int tick_hz = 30;
  std::string opponent_head = "q";
  bool operator==(const PlaySettings&) const = default;
};

struct PathSettings {
  std::string dataset = "demos.jsonl";
  std::string model = "model.ckpt";
  std::string out = "out";
  bool operator==(const PathSettings&) const = default;
};

/// Every tunable of a run. Keys are "section.field" (plus the top-level
/// "seed"); unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  GameConfig game;
  ModelConfig model;
  EncoderLimits encoder;
  nn::OptimizerConfig optimizer;
  DqnConfig dqn;
  HybridSchedule schedule;
  BcConfig offline{512, 8, true};
  RewardKind reward_kind = RewardKind::Advanced;
  RewardWeights rewards;
  int checkpoint_every = 50;
  CollectSettings collect;
  PretrainSettings pretrain;
  EvalSettings eval;
  PlaySettings play;
  PathSettings paths;

  /// Throws ConfigError naming the key for an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  /// Throws ConfigError for an unknown key.
  std::string get(const std::string& key) const;
  /// Every accepted key, sorted.
  static const std::vector<std::string>& keys();

  /// Validates every section. Throws ConfigError.
  void validate() const;
  /// "key = value" for every key in sorted order.
  std::string canonical_text() const;

  HybridConfig hybrid() const;

  bool operator==(const RunConfig&) const;
};

/// "key = value" lines; blank lines and lines starting with '#' are skipped.
/// model.preset is applied before the other model keys regardless of
/// position. Throws ConfigError naming source and line.
RunConfig parse_run_config(const std::string& text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// ARENA_ followed by the key upper-cased with '.' replaced by '_'.
std::string env_var_name(const std::string& key);

/// Applies every ARENA_* variable in `env` that names a key. Unrecognized
/// ARENA_* variables are rejected, except ARENA_LOG. Throws ConfigError.
void apply_env_overrides(RunConfig& config, const std::map<std::string, std::string>& env);
/// Snapshot of the process environment restricted to ARENA_* variables.
std::map<std::string, std::string> arena_environment();

}  // namespace arena
