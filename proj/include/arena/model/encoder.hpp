#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "arena/nn/tensor.hpp"
#include "arena/sim/game.hpp"

namespace arena {

struct EncoderLimits {
  int max_enemies = 4;
  int max_bullets = 16;
  int max_walls = 16;

  void validate() const;
  bool operator==(const EncoderLimits&) const = default;
};

inline constexpr int kPlayerFeatures = 8;
inline constexpr int kEnemyFeatures = 8;
inline constexpr int kBulletFeatures = 6;
inline constexpr int kWallFeatures = 6;

using Mask = std::vector<std::uint8_t>;

/// Per-entity-type feature rows with presence masks. Positions are divided by
/// the arena size, distances by its diagonal, health by max health. Rows are
/// sorted nearest-first; padded rows are zero with mask 0.
///
///   player: x, y, facing_x, facing_y, health, ammo, cooldown, 1
///   enemy:  x, y, dx, dy (relative to player), health, distance, ux, uy
///   bullet: x, y, dir_x, dir_y, hostile, distance
///   wall:   center_x, center_y, half_w, half_h, distance, blocks
///
/// (ux, uy) is the unit bearing to the enemy, zero when coincident. `blocks`
/// is 1 when the wall cuts the segment from the player to its nearest
/// opponent.
struct EntityFeatureSet {
  std::array<double, kPlayerFeatures> player{};
  nn::Tensor2 enemies;
  Mask enemy_mask;
  nn::Tensor2 bullets;
  Mask bullet_mask;
  nn::Tensor2 walls;
  Mask wall_mask;

  bool operator==(const EntityFeatureSet& o) const {
    return player == o.player && enemies == o.enemies && enemy_mask == o.enemy_mask &&
           bullets == o.bullets && bullet_mask == o.bullet_mask && walls == o.walls &&
           wall_mask == o.wall_mask;
  }
};

/// Encodes the viewer's observation. Entities beyond the limits are dropped
/// farthest-first. The observation carries its own game config.
EntityFeatureSet encode_observation(const Observation& obs, const EncoderLimits& limits);

}  // namespace arena
