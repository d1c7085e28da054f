#include "arena/train/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arena/errors.hpp"

namespace arena {

std::string to_string(EpisodeMode mode) {
  return mode == EpisodeMode::Offline ? "offline" : "online";
}

void HybridSchedule::validate() const {
  if (total_episodes < 1) throw ConfigError("schedule: total_episodes must be >= 1");
  if (phase_length < 1) throw ConfigError("schedule: phase_length must be >= 1");
  if (!(0.0 <= r_final && r_final <= r_initial && r_initial <= 1.0)) {
    throw ConfigError("schedule: need 0 <= r_final <= r_initial <= 1");
  }
}

double offline_ratio(int t, const HybridSchedule& s) {
  if (t < 0 || t > s.total_episodes) {
    throw std::invalid_argument("offline_ratio: t = " + std::to_string(t) + " outside [0, " +
                                std::to_string(s.total_episodes) + "]");
  }
  // Weighted form so that t = 0 and t = T reproduce the endpoints bit-exactly.
  const double f = static_cast<double>(t) / static_cast<double>(s.total_episodes);
  return (1.0 - f) * s.r_initial + f * s.r_final;
}

std::vector<EpisodeMode> plan_phase(const HybridSchedule& s, int phase) {
  s.validate();
  if (phase < 0 || phase >= s.phase_count()) {
    throw std::invalid_argument("plan_phase: phase " + std::to_string(phase) + " outside [0, " +
                                std::to_string(s.phase_count()) + ")");
  }
  const int start = phase * s.phase_length;
  const int length = std::min(s.phase_length, s.total_episodes - start);
  const int offline = static_cast<int>(std::lround(offline_ratio(start, s) * length));
  std::vector<EpisodeMode> plan(static_cast<std::size_t>(length), EpisodeMode::Online);
  std::fill_n(plan.begin(), std::clamp(offline, 0, length), EpisodeMode::Offline);
  return plan;
}

std::vector<EpisodeMode> plan_schedule(const HybridSchedule& s) {
  std::vector<EpisodeMode> all;
  for (int p = 0; p < s.phase_count(); ++p) {
    const auto phase = plan_phase(s, p);
    all.insert(all.end(), phase.begin(), phase.end());
  }
  return all;
}

double linear_decay(double start, double end, long step, long horizon) {
  if (horizon <= 0 || step >= horizon) return end;
  if (step <= 0) return start;
  const double f = static_cast<double>(step) / static_cast<double>(horizon);
  return (1.0 - f) * start + f * end;
}

}  // namespace arena
