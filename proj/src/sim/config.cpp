#include "arena/sim/config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "arena/errors.hpp"
#include "arena/format.hpp"
#include "arena/hash.hpp"

namespace arena {

void GameConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid game config: ") + what);
  };
  require(arena_width > 0 && arena_height > 0, "arena dimensions must be positive");
  require(max_steps > 0, "max_steps must be positive");
  require(n_enemies > 0, "n_enemies must be positive");
  require(move_speed > 0, "move_speed must be positive");
  require(bullet_speed > 0, "bullet_speed must be positive");
  require(bullet_speed > move_speed, "bullet_speed must exceed move_speed");
  require(entity_radius > 0, "entity_radius must be positive");
  require(shot_cooldown > 0, "shot_cooldown must be positive");
  require(ammo_capacity > 0, "ammo_capacity must be positive");
  require(reload_ticks > 0, "reload_ticks must be positive");
  require(n_walls >= 0, "n_walls must be non-negative");
  require(wall_size_min > 0 && wall_size_min <= wall_size_max, "wall size range is empty");
  require(wall_size_max < arena_width && wall_size_max < arena_height,
          "walls must fit inside the arena");
  require(dodge_radius > entity_radius, "dodge_radius must exceed entity_radius");
  require(max_health > 0, "max_health must be positive");
  require(6 * entity_radius < arena_width && 2 * entity_radius < arena_height,
          "arena too small for spawn regions");
}

double GameConfig::diagonal() const { return std::hypot(arena_width, arena_height); }

std::string GameConfig::canonical_text() const {
  std::ostringstream out;
  out << "arena_width = " << format_double(arena_width) << '\n'
      << "arena_height = " << format_double(arena_height) << '\n'
      << "max_steps = " << max_steps << '\n'
      << "n_enemies = " << n_enemies << '\n'
      << "move_speed = " << format_double(move_speed) << '\n'
      << "bullet_speed = " << format_double(bullet_speed) << '\n'
      << "entity_radius = " << format_double(entity_radius) << '\n'
      << "shot_cooldown = " << shot_cooldown << '\n'
      << "ammo_capacity = " << ammo_capacity << '\n'
      << "reload_ticks = " << reload_ticks << '\n'
      << "n_walls = " << n_walls << '\n'
      << "wall_size_min = " << format_double(wall_size_min) << '\n'
      << "wall_size_max = " << format_double(wall_size_max) << '\n'
      << "dodge_radius = " << format_double(dodge_radius) << '\n'
      << "max_health = " << max_health << '\n';
  return out.str();
}

std::string fingerprint(const GameConfig& config) {
  Fnv1a h;
  h.str(config.canonical_text());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

}  // namespace arena
