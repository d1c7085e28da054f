#pragma once

#include <string>
#include <vector>

namespace arena {

enum class EpisodeMode { Offline, Online };

std::string to_string(EpisodeMode mode);

struct HybridSchedule {
  int total_episodes = 1000;
  double r_initial = 0.8;
  double r_final = 0.2;
  int phase_length = 50;

  /// Throws ConfigError.
  void validate() const;
  int phase_count() const { return (total_episodes + phase_length - 1) / phase_length; }
  bool operator==(const HybridSchedule&) const = default;
};

/// Linear decay from r_initial at t = 0 to r_final at t = T. Both endpoints
/// are exact. Throws std::invalid_argument outside [0, T].
double offline_ratio(int t, const HybridSchedule& schedule);

/// Offline episodes first, then online. The count is round(ratio at the
/// phase start * phase length); the last phase may be shorter than the rest.
/// Throws std::invalid_argument for a phase beyond the horizon.
std::vector<EpisodeMode> plan_phase(const HybridSchedule& schedule, int phase);

/// Concatenation of every phase plan, total_episodes long.
std::vector<EpisodeMode> plan_schedule(const HybridSchedule& schedule);

/// Linear from start to end over the first `horizon` steps, then constant.
double linear_decay(double start, double end, long step, long horizon);

}  // namespace arena
