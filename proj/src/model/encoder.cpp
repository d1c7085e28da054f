#include "arena/model/encoder.hpp"

#include <algorithm>
#include <numeric>

#include "arena/errors.hpp"

namespace arena {

void EncoderLimits::validate() const {
  if (max_enemies < 1 || max_bullets < 1 || max_walls < 1) {
    throw ConfigError("encoder limits must all be at least 1");
  }
}

namespace {

// Indices of `items` ordered by ascending key; equal keys keep input order.
template <typename T, typename KeyFn>
std::vector<std::size_t> nearest_first(const std::vector<T>& items, KeyFn key, int limit) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> keys(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) keys[i] = key(items[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  if (static_cast<int>(order.size()) > limit) order.resize(limit);
  return order;
}

}  // namespace

EntityFeatureSet encode_observation(const Observation& obs, const EncoderLimits& limits) {
  const GameConfig& c = obs.config;
  const double w = c.arena_width;
  const double h = c.arena_height;
  const double diag = c.diagonal();
  const EntityState& self = obs.self;
  const Vec2 p = self.position;

  EntityFeatureSet f;
  f.player = {p.x / w,
              p.y / h,
              self.facing.x,
              self.facing.y,
              static_cast<double>(self.health) / c.max_health,
              static_cast<double>(self.ammo) / c.ammo_capacity,
              static_cast<double>(self.cooldown) / c.shot_cooldown,
              1.0};

  std::vector<EntityState> opponents;
  for (const auto& e : obs.others) {
    if (e.kind != self.kind) opponents.push_back(e);
  }
  f.enemies = nn::Tensor2::Zero(limits.max_enemies, kEnemyFeatures);
  f.enemy_mask.assign(limits.max_enemies, 0);
  const auto enemy_order = nearest_first(
      opponents, [&](const EntityState& e) { return distance(e.position, p); }, limits.max_enemies);
  for (std::size_t r = 0; r < enemy_order.size(); ++r) {
    const EntityState& e = opponents[enemy_order[r]];
    const Vec2 d = e.position - p;
    const double dist = length(d);
    const Vec2 u = dist > 0.0 ? d * (1.0 / dist) : Vec2{0.0, 0.0};
    f.enemies.row(static_cast<Eigen::Index>(r)) << e.position.x / w, e.position.y / h, d.x / w,
        d.y / h, static_cast<double>(e.health) / c.max_health, dist / diag, u.x, u.y;
    f.enemy_mask[r] = 1;
  }

  f.bullets = nn::Tensor2::Zero(limits.max_bullets, kBulletFeatures);
  f.bullet_mask.assign(limits.max_bullets, 0);
  const auto bullet_order = nearest_first(
      obs.bullets, [&](const Bullet& b) { return distance(b.position, p); }, limits.max_bullets);
  for (std::size_t r = 0; r < bullet_order.size(); ++r) {
    const Bullet& b = obs.bullets[bullet_order[r]];
    f.bullets.row(static_cast<Eigen::Index>(r)) << b.position.x / w, b.position.y / h,
        b.direction.x, b.direction.y, b.owner != self.id ? 1.0 : 0.0,
        distance(b.position, p) / diag;
    f.bullet_mask[r] = 1;
  }

  f.walls = nn::Tensor2::Zero(limits.max_walls, kWallFeatures);
  f.wall_mask.assign(limits.max_walls, 0);
  auto wall_distance = [&](const Wall& wall) {
    return distance(p, closest_point_on_wall(p, wall));
  };
  const auto wall_order = nearest_first(obs.walls, wall_distance, limits.max_walls);
  const EntityState* target = nearest_opponent(obs.others, self);
  for (std::size_t r = 0; r < wall_order.size(); ++r) {
    const Wall& wall = obs.walls[wall_order[r]];
    const Vec2 center = wall.center();
    const Vec2 half = wall.half_extents();
    const bool blocks =
        target != nullptr && segment_wall_entry(p, target->position, wall).has_value();
    f.walls.row(static_cast<Eigen::Index>(r)) << center.x / w, center.y / h, half.x / w,
        half.y / h, wall_distance(wall) / diag, blocks ? 1.0 : 0.0;
    f.wall_mask[r] = 1;
  }
  return f;
}

}  // namespace arena
