#pragma once

#include "arena/sim/game.hpp"

namespace arena {

/// Signed reward weights; penalties are negative.
struct RewardWeights {
  double hit_enemy = 0.5;
  double kill = 1.0;
  double got_hit = -0.5;
  double death = -1.0;
  double win = 1.0;
  double timeout = -0.2;
  double wall_bump = -0.05;
  double dodge = 0.1;
  /// Applied per shot fired without line of sight to the nearest opponent.
  double wasted_shot = -0.02;
  /// Per pixel of decrease in distance to the nearest opponent.
  double approach_per_px = 0.001;
  /// Bound on the positional term per step.
  double positional_clamp = 0.1;

  /// Throws ConfigError on non-finite weights or a negative clamp.
  void validate() const;
  bool operator==(const RewardWeights&) const = default;
};

struct RewardBreakdown {
  double r_events = 0.0;
  double r_tactical = 0.0;
  double r_positional = 0.0;
  double total = 0.0;  // tanh of the component sum
};

/// Weighted sum of outcome events: hits, kills, damage taken, death, win, timeout.
double basic_reward(const StepEvents& events, const RewardWeights& weights = {});

/// Events plus tactical (dodges, wall bumps, wasted shots) and positional
/// (approach) shaping, squashed by tanh. `agent` is the entity the events
/// belong to. Throws std::invalid_argument unless after.tick == before.tick + 1.
RewardBreakdown advanced_reward(const StepEvents& events, const GameState& before,
                                const GameState& after, EntityId agent,
                                const RewardWeights& weights = {});

/// tanh(r_events + r_tactical + r_positional) with the components as given.
RewardBreakdown combine_reward(double r_events, double r_tactical, double r_positional);

}  // namespace arena
