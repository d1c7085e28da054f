#include "arena/rewards/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "arena/errors.hpp"

namespace arena {

void RewardWeights::validate() const {
  for (double w : {hit_enemy, kill, got_hit, death, win, timeout, wall_bump, dodge, wasted_shot,
                   approach_per_px, positional_clamp}) {
    if (!std::isfinite(w)) throw ConfigError("reward weights must be finite");
  }
  if (positional_clamp < 0.0) throw ConfigError("rewards: positional_clamp must be >= 0");
}

double basic_reward(const StepEvents& e, const RewardWeights& w) {
  double r = 0.0;
  r += w.hit_enemy * static_cast<double>(e.hits_landed.size());
  r += w.kill * e.kills;
  r += w.got_hit * static_cast<double>(e.hits_taken.size());
  if (e.death) r += w.death;
  if (e.won) r += w.win;
  if (e.timed_out) r += w.timeout;
  return r;
}

RewardBreakdown combine_reward(double r_events, double r_tactical, double r_positional) {
  RewardBreakdown b;
  b.r_events = r_events;
  b.r_tactical = r_tactical;
  b.r_positional = r_positional;
  // tanh rounds to +-1 in double for |x| > ~19; keep the bound strict.
  constexpr double kBound = 1.0 - 0x1p-53;
  b.total = std::clamp(std::tanh(r_events + r_tactical + r_positional), -kBound, kBound);
  return b;
}

RewardBreakdown advanced_reward(const StepEvents& e, const GameState& before,
                                const GameState& after, EntityId agent, const RewardWeights& w) {
  if (after.tick != before.tick + 1) {
    throw std::invalid_argument("advanced_reward: states are " +
                                std::to_string(after.tick - before.tick) + " ticks apart, expected 1");
  }
  double tactical = w.dodge * e.bullets_dodged;
  if (e.wall_bump) tactical += w.wall_bump;
  if (e.shots_fired > 0) {
    const EntityState* self = before.find(agent);
    const EntityState* target = self ? nearest_opponent(before.entities, *self) : nullptr;
    const bool sighted =
        target != nullptr && line_of_sight(self->position, target->position, before.walls);
    if (!sighted) tactical += w.wasted_shot * e.shots_fired;
  }
  const double positional =
      std::clamp(-w.approach_per_px * e.distance_delta_to_nearest_enemy, -w.positional_clamp,
                 w.positional_clamp);
  return combine_reward(basic_reward(e, w), tactical, positional);
}

}  // namespace arena
