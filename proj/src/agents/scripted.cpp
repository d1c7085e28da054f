#include "arena/agents/scripted.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace arena {

namespace {

constexpr double kHalfPi = 1.57079632679489661923;

bool position_free(Vec2 p, const Observation& obs) {
  const GameConfig& c = obs.config;
  const double r = c.entity_radius;
  if (p.x < r || p.x > c.arena_width - r || p.y < r || p.y > c.arena_height - r) return false;
  for (const auto& wall : obs.walls) {
    if (circle_overlaps_wall(p, r, wall)) return false;
  }
  return true;
}

// Greedy step toward the target; wall-free next positions win over blocked ones.
MoveDir approach_direction(const Observation& obs, Vec2 target) {
  MoveDir best_free = MoveDir::Stay;
  MoveDir best_any = MoveDir::Stay;
  double free_d = std::numeric_limits<double>::infinity();
  double any_d = std::numeric_limits<double>::infinity();
  for (MoveDir dir : kCompass) {
    const Vec2 next = obs.self.position + direction_vector(dir) * obs.config.move_speed;
    const double d = distance(next, target);
    if (d < any_d) {
      any_d = d;
      best_any = dir;
    }
    if (d < free_d && position_free(next, obs)) {
      free_d = d;
      best_free = dir;
    }
  }
  return std::isfinite(free_d) ? best_free : best_any;
}

const Wall* nearest_wall(const Observation& obs) {
  const Wall* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& wall : obs.walls) {
    const double d = distance(obs.self.position, closest_point_on_wall(obs.self.position, wall));
    if (d < best_d) {
      best_d = d;
      best = &wall;
    }
  }
  return best;
}

struct Engagement {
  const EntityState* opponent = nullptr;
  Bearing bearing{MoveDir::Stay, 0.0};
  bool can_fire = false;  // aligned, clear line, ammo available
};

Engagement engage(const Observation& obs, const RuleParams& params) {
  Engagement e;
  e.opponent = nearest_opponent(obs.others, obs.self);
  if (e.opponent == nullptr) return e;
  const Vec2 delta = e.opponent->position - obs.self.position;
  const double range =
      params.engage_distance > 0.0 ? params.engage_distance : obs.config.diagonal();
  if (length(delta) > range) {
    e.opponent = nullptr;
    return e;
  }
  e.bearing = nearest_compass(delta);
  // At close range a compass shot connects even when the angular error
  // exceeds the tolerance: the bullet passes within one radius of the center.
  const double miss = length(delta) * std::sin(e.bearing.error);
  const bool aligned = e.bearing.error <= params.aim_tolerance ||
                       (e.bearing.error < kHalfPi && miss < obs.config.entity_radius);
  e.can_fire = aligned &&
               line_of_sight(obs.self.position, e.opponent->position, obs.walls) &&
               obs.self.ammo > 0;
  return e;
}

// Shoots only when the chosen movement also points along the firing line.
int with_aligned_shot(MoveDir move, const Engagement& e) {
  const bool shoot = e.can_fire && move == e.bearing.dir;
  return encode_action({move, shoot});
}

}  // namespace

ConstantPolicy::ConstantPolicy(int action, std::string name)
    : action_(encode_action(decode_action(action))), name_(std::move(name)) {}

Bearing nearest_compass(Vec2 delta) {
  if (delta == Vec2{0.0, 0.0}) return {MoveDir::E, 0.0};
  Bearing best{MoveDir::N, std::numeric_limits<double>::infinity()};
  for (MoveDir dir : kCompass) {
    const Vec2 v = direction_vector(dir);
    const double err = std::abs(std::atan2(cross(delta, v), dot(delta, v)));
    if (err < best.error) best = {dir, err};
  }
  return best;
}

int act_random(const Observation&, Rng& rng) {
  return static_cast<int>(rng.uniform_int(kNumActions));
}

int act_rule_based(const Observation& obs, const RuleParams& params) {
  const Engagement e = engage(obs, params);
  if (e.opponent == nullptr) return encode_action({MoveDir::Stay, false});
  if (e.can_fire) return encode_action({e.bearing.dir, true});
  return encode_action({approach_direction(obs, e.opponent->position), false});
}

int act_rule_based_2(const Observation& obs, const RuleParams& params) {
  const Engagement e = engage(obs, params);
  const Vec2 self = obs.self.position;

  // Dodge the most imminent hostile bullet whose path passes close by.
  const double threat_radius = params.strafe_bias * obs.config.entity_radius;
  const Bullet* threat = nullptr;
  double threat_t = std::numeric_limits<double>::infinity();
  Vec2 threat_offset;
  for (const auto& b : obs.bullets) {
    if (b.owner == obs.self.id) continue;
    const Vec2 rel = self - b.position;
    const double t = dot(rel, b.direction);
    if (t <= 0.0) continue;
    const Vec2 offset = rel - b.direction * t;
    if (length(offset) <= threat_radius && t < threat_t) {
      threat = &b;
      threat_t = t;
      threat_offset = offset;
    }
  }
  if (threat != nullptr) {
    const Vec2 left{-threat->direction.y, threat->direction.x};
    const Vec2 right{threat->direction.y, -threat->direction.x};
    Vec2 side = left;
    if (const Wall* wall = nearest_wall(obs)) {
      const Vec2 to_wall = closest_point_on_wall(self, *wall) - self;
      side = dot(left, to_wall) <= dot(right, to_wall) ? left : right;
    } else if (dot(threat_offset, right) > 0.0) {
      side = right;
    }
    return with_aligned_shot(nearest_compass(side).dir, e);
  }

  // Seek cover when losing on health.
  if (e.opponent != nullptr && obs.self.health < e.opponent->health) {
    if (const Wall* wall = nearest_wall(obs)) {
      const Vec2 to_wall = closest_point_on_wall(self, *wall) - self;
      return with_aligned_shot(nearest_compass(to_wall).dir, e);
    }
  }

  return act_rule_based(obs, params);
}

ScriptedPolicy::ScriptedPolicy(ScriptedVariant variant, RuleParams params)
    : variant_(variant), params_(params) {}

int ScriptedPolicy::act(const Observation& obs, Rng& rng) {
  switch (variant_) {
    case ScriptedVariant::Random: return act_random(obs, rng);
    case ScriptedVariant::RuleBased: return act_rule_based(obs, params_);
    case ScriptedVariant::RuleBased2: return act_rule_based_2(obs, params_);
  }
  return 0;
}

std::string ScriptedPolicy::name() const { return display_name(variant_); }

ScriptedVariant parse_scripted_variant(std::string_view text) {
  if (text == "random" || text == "Random") return ScriptedVariant::Random;
  if (text == "rule" || text == "Rule Based" || text == "rule_based") {
    return ScriptedVariant::RuleBased;
  }
  if (text == "rule2" || text == "Rule Based 2" || text == "rule_based_2") {
    return ScriptedVariant::RuleBased2;
  }
  throw std::invalid_argument("unknown scripted policy '" + std::string(text) +
                              "' (expected random|rule|rule2)");
}

std::string display_name(ScriptedVariant variant) {
  switch (variant) {
    case ScriptedVariant::Random: return "Random";
    case ScriptedVariant::RuleBased: return "Rule Based";
    case ScriptedVariant::RuleBased2: return "Rule Based 2";
  }
  return "?";
}

}  // namespace arena
