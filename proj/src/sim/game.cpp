#include "arena/sim/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "arena/errors.hpp"
#include "arena/hash.hpp"
#include "arena/log.hpp"

namespace arena {

namespace {

constexpr int kMaxPlacementAttempts = 10000;

bool inside_arena(Vec2 p, const GameConfig& c) {
  return p.x >= 0.0 && p.x <= c.arena_width && p.y >= 0.0 && p.y <= c.arena_height;
}

bool blocked_by_wall(Vec2 center, const GameState& state) {
  const double r = state.config.entity_radius;
  for (const auto& wall : state.walls) {
    if (circle_overlaps_wall(center, r, wall)) return true;
  }
  return false;
}

// Entities are solid discs: a move may not end overlapping another entity
// that it was not already overlapping.
bool blocked_by_entity(const EntityState& self, Vec2 center, const GameState& state) {
  const double min_d = 2.0 * state.config.entity_radius;
  for (const auto& other : state.entities) {
    if (other.id == self.id) continue;
    const double d = distance(center, other.position);
    if (d < min_d && d < distance(self.position, other.position)) return true;
  }
  return false;
}

// Axis-separated slide: each axis moves independently and is zeroed when the
// move would leave the arena or overlap a wall or another entity. Only walls
// and the arena boundary count as bumps.
bool move_entity(EntityState& e, Vec2 delta, const GameState& state) {
  const GameConfig& c = state.config;
  const double r = c.entity_radius;
  bool bumped = false;

  if (delta.x != 0.0) {
    Vec2 next{e.position.x + delta.x, e.position.y};
    const double clamped = std::clamp(next.x, r, c.arena_width - r);
    if (clamped != next.x) bumped = true;
    next.x = clamped;
    if (blocked_by_wall(next, state)) {
      bumped = true;
    } else if (!blocked_by_entity(e, next, state)) {
      e.position = next;
    }
  }
  if (delta.y != 0.0) {
    Vec2 next{e.position.x, e.position.y + delta.y};
    const double clamped = std::clamp(next.y, r, c.arena_height - r);
    if (clamped != next.y) bumped = true;
    next.y = clamped;
    if (blocked_by_wall(next, state)) {
      bumped = true;
    } else if (!blocked_by_entity(e, next, state)) {
      e.position = next;
    }
  }
  return bumped;
}

double nearest_opponent_distance(const std::vector<EntityState>& entities, const EntityState& self,
                                 Vec2 position) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& other : entities) {
    if (other.kind == self.kind) continue;
    best = std::min(best, distance(position, other.position));
  }
  return best;
}

struct BulletTrace {
  Vec2 start;
  Vec2 end;
  EntityId owner;
  std::optional<EntityId> struck;
};

}  // namespace

const EntityState* GameState::find(EntityId id) const {
  for (const auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

EntityState* GameState::find(EntityId id) {
  for (auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const EntityState* GameState::player() const {
  for (const auto& e : entities) {
    if (e.kind == EntityKind::Player) return &e;
  }
  return nullptr;
}

std::vector<const EntityState*> GameState::enemies() const {
  std::vector<const EntityState*> out;
  for (const auto& e : entities) {
    if (e.kind == EntityKind::Enemy) out.push_back(&e);
  }
  return out;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Ongoing: return "Ongoing";
    case Outcome::Win: return "Win";
    case Outcome::Loss: return "Loss";
    case Outcome::Timeout: return "Timeout";
  }
  return "?";
}

GameState build_arena(const GameConfig& config, std::uint64_t seed) {
  config.validate();
  GameState state;
  state.config = config;
  state.rng = Rng(seed);
  Rng& rng = state.rng;

  const double r = config.entity_radius;
  const double w = config.arena_width;
  const double h = config.arena_height;
  const Vec2 center{w / 2.0, h / 2.0};

  auto make_entity = [&](EntityId id, EntityKind kind, double x_lo, double x_hi) {
    EntityState e;
    e.id = id;
    e.kind = kind;
    e.position = {rng.uniform(x_lo, x_hi), rng.uniform(r, h - r)};
    e.facing = normalized(center - e.position);
    if (e.facing == Vec2{0.0, 0.0}) e.facing = {1.0, 0.0};
    e.health = config.max_health;
    e.ammo = config.ammo_capacity;
    return e;
  };

  state.entities.push_back(make_entity(kPlayerId, EntityKind::Player, r, w / 3.0));
  for (int i = 0; i < config.n_enemies; ++i) {
    state.entities.push_back(make_entity(i + 1, EntityKind::Enemy, 2.0 * w / 3.0, w - r));
  }

  // Walls keep clear of spawn discs and leave a passable gap between each other.
  const double spawn_clearance = 3.0 * r;
  const double wall_gap = 2.0 * r + 2.0;
  int attempts = 0;
  while (static_cast<int>(state.walls.size()) < config.n_walls) {
    if (++attempts > kMaxPlacementAttempts) {
      throw ConfigError("arena too crowded: could not place " + std::to_string(config.n_walls) +
                        " walls in " + std::to_string(kMaxPlacementAttempts) + " attempts");
    }
    const double ww = rng.uniform(config.wall_size_min, config.wall_size_max);
    const double wh = rng.uniform(config.wall_size_min, config.wall_size_max);
    Wall wall;
    wall.min_corner = {rng.uniform(0.0, w - ww), rng.uniform(0.0, h - wh)};
    wall.max_corner = wall.min_corner + Vec2{ww, wh};

    bool ok = true;
    for (const auto& e : state.entities) {
      if (circle_overlaps_wall(e.position, spawn_clearance, wall)) ok = false;
    }
    for (const auto& other : state.walls) {
      if (walls_overlap(wall, other, wall_gap)) ok = false;
    }
    if (ok) state.walls.push_back(wall);
  }
  return state;
}

StepResult step(const GameState& prev, const std::map<EntityId, int>& actions) {
  StepResult result{prev, {}};
  GameState& s = result.state;
  const GameConfig& c = s.config;
  auto& events = result.events;

  std::map<EntityId, ActionSpec> specs;
  for (const auto& [id, index] : actions) {
    const ActionSpec spec = decode_action(index);
    if (s.find(id) == nullptr) {
      log::debug("step: ignoring action for dead or unknown entity " + std::to_string(id));
      continue;
    }
    specs[id] = spec;
  }
  for (const auto& e : s.entities) {
    events[e.id] = StepEvents{};
    specs.try_emplace(e.id, ActionSpec{});
  }

  // (1) movement
  for (auto& e : s.entities) {
    const ActionSpec spec = specs[e.id];
    const Vec2 dir = direction_vector(spec.move_dir);
    if (spec.move_dir == MoveDir::Stay) continue;
    e.facing = dir;
    if (move_entity(e, dir * c.move_speed, s)) events[e.id].wall_bump = true;
  }

  // (2) shot spawning
  for (auto& e : s.entities) {
    if (!specs[e.id].shoot || e.cooldown > 0 || e.ammo <= 0) continue;
    Bullet b;
    b.position = e.position + e.facing * c.entity_radius;
    b.direction = e.facing;
    b.owner = e.id;
    b.speed = c.bullet_speed;
    s.bullets.push_back(b);
    e.ammo -= 1;
    e.cooldown = c.shot_cooldown;
    if (e.reload_timer == 0) e.reload_timer = c.reload_ticks;
    events[e.id].shots_fired += 1;
  }

  // (3) bullet advance with swept collision
  std::vector<BulletTrace> traces;
  std::vector<Bullet> surviving;
  traces.reserve(s.bullets.size());
  for (auto& b : s.bullets) {
    const Vec2 start = b.position;
    const Vec2 end = start + b.direction * b.speed;
    double best_t = std::numeric_limits<double>::infinity();
    std::optional<EntityId> struck;
    bool hit_wall = false;
    for (const auto& wall : s.walls) {
      if (auto t = segment_wall_entry(start, end, wall); t && *t < best_t) {
        best_t = *t;
        hit_wall = true;
      }
    }
    for (const auto& e : s.entities) {
      if (e.id == b.owner) continue;
      if (auto t = segment_circle_entry(start, end, e.position, c.entity_radius); t && *t < best_t) {
        best_t = *t;
        struck = e.id;
        hit_wall = false;
      }
    }
    BulletTrace trace{start, end, b.owner, struck};
    if (struck || hit_wall) {
      trace.end = start + (end - start) * best_t;
    } else if (!inside_arena(end, c)) {
      // leaves the arena
    } else {
      b.position = end;
      b.age += 1;
      surviving.push_back(b);
    }
    traces.push_back(trace);
  }
  s.bullets = std::move(surviving);

  // (4) hit and kill resolution
  for (const auto& trace : traces) {
    if (!trace.struck) continue;
    EntityState* target = s.find(*trace.struck);
    if (target == nullptr || target->health <= 0) continue;
    target->health -= 1;
    events[target->id].hits_taken.push_back(trace.owner);
    auto owner_events = events.find(trace.owner);
    if (owner_events != events.end()) owner_events->second.hits_landed.push_back(target->id);
    if (target->health == 0) {
      events[target->id].death = true;
      if (owner_events != events.end()) owner_events->second.kills += 1;
    }
  }
  std::erase_if(s.entities, [](const EntityState& e) { return e.health <= 0; });

  // (5) dodge detection: the closest approach of the bullet's line to the
  // entity falls inside this tick's travel and within the dodge band.
  for (const auto& trace : traces) {
    const Vec2 seg = trace.end - trace.start;
    const double len2 = dot(seg, seg);
    if (len2 == 0.0) continue;
    for (const auto& e : s.entities) {
      if (e.id == trace.owner || trace.struck == e.id) continue;
      const double t = dot(e.position - trace.start, seg) / len2;
      if (t < 0.0 || t >= 1.0) continue;
      const double d = distance(e.position, trace.start + seg * t);
      if (d > c.entity_radius && d <= c.dodge_radius) events[e.id].bullets_dodged += 1;
    }
  }

  // (6) timers
  for (auto& e : s.entities) {
    if (e.cooldown > 0) e.cooldown -= 1;
    if (e.ammo < c.ammo_capacity) {
      if (e.reload_timer > 0) e.reload_timer -= 1;
      if (e.reload_timer == 0) {
        e.ammo += 1;
        e.reload_timer = e.ammo < c.ammo_capacity ? c.reload_ticks : 0;
      }
    } else {
      e.reload_timer = 0;
    }
  }

  // (7) clock
  s.tick += 1;

  const Outcome result_outcome = outcome(s);
  for (auto& [id, ev] : events) {
    const EntityState* before = prev.find(id);
    const EntityState* after = s.find(id);
    if (after != nullptr) {
      const double d0 = nearest_opponent_distance(prev.entities, *before, before->position);
      const double d1 = nearest_opponent_distance(s.entities, *after, after->position);
      if (std::isfinite(d0) && std::isfinite(d1)) ev.distance_delta_to_nearest_enemy = d1 - d0;
    }
    ev.timed_out = result_outcome == Outcome::Timeout;
    if (before->kind == EntityKind::Player) {
      ev.won = result_outcome == Outcome::Win;
    } else {
      ev.won = result_outcome == Outcome::Loss && after != nullptr;
    }
  }
  return result;
}

Outcome outcome(const GameState& state) {
  const bool player_alive = state.player() != nullptr;
  const bool enemies_alive = !state.enemies().empty();
  if (!player_alive) return Outcome::Loss;
  if (!enemies_alive) return Outcome::Win;
  if (state.tick >= state.config.max_steps) return Outcome::Timeout;
  return Outcome::Ongoing;
}

Observation observe(const GameState& state, EntityId viewer) {
  const EntityState* self = state.find(viewer);
  if (self == nullptr) {
    throw std::out_of_range("observe: entity " + std::to_string(viewer) + " is not alive");
  }
  Observation obs;
  obs.tick = state.tick;
  obs.self = *self;
  for (const auto& e : state.entities) {
    if (e.id != viewer) obs.others.push_back(e);
  }
  obs.bullets = state.bullets;
  obs.walls = state.walls;
  obs.config = state.config;
  return obs;
}

std::uint64_t state_hash(const GameState& state) {
  Fnv1a h;
  h.i64(state.tick);
  h.u64(state.rng.seed());
  h.u64(state.rng.draws());
  h.u64(state.entities.size());
  for (const auto& e : state.entities) {
    h.i64(e.id);
    h.i64(static_cast<int>(e.kind));
    h.f64(e.position.x);
    h.f64(e.position.y);
    h.f64(e.facing.x);
    h.f64(e.facing.y);
    h.i64(e.health);
    h.i64(e.ammo);
    h.i64(e.cooldown);
    h.i64(e.reload_timer);
  }
  h.u64(state.bullets.size());
  for (const auto& b : state.bullets) {
    h.f64(b.position.x);
    h.f64(b.position.y);
    h.f64(b.direction.x);
    h.f64(b.direction.y);
    h.i64(b.owner);
    h.f64(b.speed);
    h.i64(b.age);
  }
  h.u64(state.walls.size());
  for (const auto& w : state.walls) {
    h.f64(w.min_corner.x);
    h.f64(w.min_corner.y);
    h.f64(w.max_corner.x);
    h.f64(w.max_corner.y);
  }
  return h.digest();
}

const EntityState* nearest_opponent(const std::vector<EntityState>& entities,
                                    const EntityState& self) {
  const EntityState* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& e : entities) {
    if (e.id == self.id || e.kind == self.kind) continue;
    const double d = distance(self.position, e.position);
    if (d < best_d) {
      best_d = d;
      best = &e;
    }
  }
  return best;
}

bool line_of_sight(Vec2 from, Vec2 to, const std::vector<Wall>& walls) {
  for (const auto& wall : walls) {
    if (segment_wall_entry(from, to, wall)) return false;
  }
  return true;
}

}  // namespace arena
