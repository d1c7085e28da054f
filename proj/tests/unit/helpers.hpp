#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "arena/sim/game.hpp"

namespace arena::testing {

inline EntityState make_entity(EntityId id, EntityKind kind, Vec2 pos, Vec2 facing = {1.0, 0.0}) {
  EntityState e;
  e.id = id;
  e.kind = kind;
  e.position = pos;
  e.facing = facing;
  e.health = 3;
  e.ammo = 3;
  return e;
}

/// Player at `player`, one enemy at `enemy`, optional walls.
inline GameState duel(Vec2 player, Vec2 enemy, std::vector<Wall> walls = {},
                      GameConfig config = {}) {
  GameState s;
  s.config = config;
  s.entities.push_back(make_entity(kPlayerId, EntityKind::Player, player));
  s.entities.push_back(make_entity(1, EntityKind::Enemy, enemy, {-1.0, 0.0}));
  s.walls = std::move(walls);
  return s;
}

/// Pearson chi-square statistic of counts against a uniform expectation.
template <std::size_t N>
double chi_square_uniform(const std::array<long, N>& counts) {
  double total = 0.0;
  for (long c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(N);
  double chi = 0.0;
  for (long c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

// Upper 0.001 critical value of the chi-square distribution with 17 degrees of
// freedom, from standard tables.
inline constexpr double kChiSquare17At0001 = 40.790;

/// Fresh empty directory under the system temp dir, unique per process.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("arena-test-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace arena::testing
