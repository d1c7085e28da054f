#pragma once

#include <cstdint>
#include <string>

namespace arena {

/// Arena and combat constants. Lengths in pixels, durations in ticks.
struct GameConfig {
  double arena_width = 1200.0;
  double arena_height = 900.0;
  int max_steps = 1000;
  int n_enemies = 1;
  double move_speed = 5.0;
  double bullet_speed = 15.0;
  double entity_radius = 20.0;
  int shot_cooldown = 10;
  int ammo_capacity = 3;
  int reload_ticks = 30;
  int n_walls = 6;
  double wall_size_min = 60.0;
  double wall_size_max = 200.0;
  double dodge_radius = 45.0;
  int max_health = 3;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  double diagonal() const;

  /// Canonical "key = value" text, one line per field, used for fingerprints
  /// and embedded in datasets and checkpoints.
  std::string canonical_text() const;

  bool operator==(const GameConfig&) const = default;
};

/// Stable hash of canonical_text(), printed as 16 hex digits.
std::string fingerprint(const GameConfig& config);

}  // namespace arena
