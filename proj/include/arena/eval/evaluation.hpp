#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "arena/agents/policy.hpp"
#include "arena/rewards/rewards.hpp"
#include "arena/sim/game.hpp"

namespace arena {

struct EpisodeStats {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Ongoing;
  int length = 0;
  double reward = 0.0;  // advanced reward summed over the agent's steps
  int shots = 0;
  int hits = 0;

  bool operator==(const EpisodeStats&) const = default;
};

/// Aggregate of one agent against one opponent. Rates are percentages.
struct EvalReport {
  std::string agent;
  std::string opponent;
  int episodes = 0;
  std::uint64_t seed = 0;  // episodes used seeds seed .. seed + episodes - 1
  double win_rate = 0.0;
  double loss_rate = 0.0;
  double timeout_rate = 0.0;
  double mean_length = 0.0;
  double mean_reward = 0.0;
  double reward_variance = 0.0;  // population variance across episodes
  long shots = 0;
  long hits = 0;
  double accuracy = 0.0;  // hits / shots, 0 without shots
  /// Empty when the report was parsed back from the delimited table.
  std::vector<EpisodeStats> per_episode;

  /// Equality of every aggregate field, ignoring per_episode.
  bool same_summary(const EvalReport& other) const;
  bool operator==(const EvalReport&) const = default;
};

/// Plays n_episodes with the agent as player and the opponent controlling
/// every enemy. Episode i uses arena seed seed + i; the agent draws from
/// Rng(seed + i, 1) and the opponent from Rng(seed + i, 2). Pass a greedy
/// agent for the standard protocol. Throws std::invalid_argument for n < 1.
EvalReport run_match(Policy& agent, Policy& opponent, int n_episodes, const GameConfig& config,
                     std::uint64_t seed, const RewardWeights& weights = {});

/// Aggregates per-episode rows into a report.
EvalReport summarize(std::string agent, std::string opponent, std::uint64_t seed,
                     std::vector<EpisodeStats> episodes);

/// Population variance. Throws std::invalid_argument for fewer than 2 windows.
double stability(std::span<const double> window_win_rates);

/// Win fraction of each complete, non-overlapping window; a trailing partial
/// window is dropped. Throws std::invalid_argument for window < 1.
std::vector<double> windowed_win_rates(std::span<const Outcome> outcomes, int window);

enum class ExportFormat { Table, Records };

ExportFormat parse_export_format(const std::string& text);

/// Table: comma-separated with one header row and one row per report.
/// Records: one JSON object per report per line, per-episode rows included.
/// Output is byte-stable for equal input. Throws std::invalid_argument when
/// reports is empty.
std::string export_reports(std::span<const EvalReport> reports, ExportFormat format);
void write_reports(const std::filesystem::path& path, std::span<const EvalReport> reports,
                   ExportFormat format);

/// Inverses of export_reports. Throw IoError naming the offending line.
std::vector<EvalReport> parse_reports(const std::string& text, ExportFormat format,
                                      const std::string& source = "report");

/// Header columns of the table export, in order.
const std::vector<std::string>& report_table_columns();

}  // namespace arena
