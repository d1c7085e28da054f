#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "arena/rng.hpp"
#include "arena/sim/actions.hpp"
#include "arena/sim/config.hpp"
#include "arena/sim/geometry.hpp"
#include "arena/sim/vec2.hpp"

namespace arena {

using EntityId = int;

enum class EntityKind : std::uint8_t { Player = 0, Enemy = 1 };

struct EntityState {
  EntityId id = 0;
  EntityKind kind = EntityKind::Player;
  Vec2 position;
  Vec2 facing{1.0, 0.0};
  int health = 3;
  int ammo = 0;
  int cooldown = 0;
  int reload_timer = 0;

  bool operator==(const EntityState&) const = default;
};

struct Bullet {
  Vec2 position;
  Vec2 direction;
  EntityId owner = 0;
  double speed = 0.0;
  int age = 0;

  bool operator==(const Bullet&) const = default;
};

struct GameState {
  GameConfig config;
  int tick = 0;
  std::vector<EntityState> entities;  // ascending id
  std::vector<Bullet> bullets;
  std::vector<Wall> walls;
  Rng rng;

  const EntityState* find(EntityId id) const;
  EntityState* find(EntityId id);
  const EntityState* player() const;
  std::vector<const EntityState*> enemies() const;
};

/// Per-entity outcome of one step. Counts are per tick.
struct StepEvents {
  int shots_fired = 0;
  std::vector<EntityId> hits_landed;  // target of each landed hit
  std::vector<EntityId> hits_taken;   // source of each hit received
  int kills = 0;
  bool death = false;
  bool wall_bump = false;
  int bullets_dodged = 0;
  /// Distance to the nearest opponent after the step minus before; 0 when
  /// either side of the comparison has no live opponent.
  double distance_delta_to_nearest_enemy = 0.0;
  bool won = false;
  bool timed_out = false;

  bool operator==(const StepEvents&) const = default;
};

enum class Outcome : std::uint8_t { Ongoing = 0, Win, Loss, Timeout };

std::string_view to_string(Outcome outcome);

struct StepResult {
  GameState state;
  std::map<EntityId, StepEvents> events;  // keyed by entities alive before the step
};

/// Everything an entity can see. Information is complete: no fog of war.
struct Observation {
  int tick = 0;
  EntityState self;
  std::vector<EntityState> others;
  std::vector<Bullet> bullets;
  std::vector<Wall> walls;
  GameConfig config;

  bool operator==(const Observation&) const = default;
};

/// Samples walls and spawns. Throws ConfigError when the rejection sampler
/// exceeds its attempt budget.
GameState build_arena(const GameConfig& config, std::uint64_t seed);

/// Advances one tick. `actions` maps entity id to action index; live entities
/// without an entry stay still, entries for dead or unknown ids are ignored.
/// Throws std::invalid_argument for a malformed index.
StepResult step(const GameState& state, const std::map<EntityId, int>& actions);

/// Loss takes precedence when both sides are eliminated on the same tick.
Outcome outcome(const GameState& state);

/// Throws std::out_of_range when the viewer is not alive.
Observation observe(const GameState& state, EntityId viewer);

std::uint64_t state_hash(const GameState& state);

/// The nearest live entity of a different kind than `self`, if any.
const EntityState* nearest_opponent(const std::vector<EntityState>& entities,
                                    const EntityState& self);

/// Whether the segment between two points is free of walls.
bool line_of_sight(Vec2 from, Vec2 to, const std::vector<Wall>& walls);

inline constexpr EntityId kPlayerId = 0;

}  // namespace arena
