#include "arena/server/session.hpp"

#include <map>

#include "json.hpp"

namespace arena {

using nlohmann::json;

namespace {

json vec(Vec2 v) { return json::array({v.x, v.y}); }

const char* kind_name(EntityKind k) { return k == EntityKind::Player ? "player" : "enemy"; }

const char* winner_name(Outcome o) {
  switch (o) {
    case Outcome::Win: return "human";
    case Outcome::Loss: return "agent";
    default: return "none";
  }
}

std::string dump(const json& j) { return j.dump(); }

}  // namespace

Session::Session(const PolicyModel& model, GameConfig game, SessionOptions options)
    : model_(&model),
      game_(std::move(game)),
      options_(options),
      fingerprint_(fingerprint(game_)),
      agent_rng_(options.seed, 11) {
  game_.validate();
  if (options_.tick_hz < 1) throw std::invalid_argument("session: tick_hz must be >= 1");
}

std::vector<Frame> Session::fail(const std::string& message) {
  phase_ = Phase::Closed;
  return {Frame{false, dump({{"type", "error"}, {"message", message}})}};
}

std::vector<Frame> Session::start_match() {
  state_ = build_arena(game_, options_.seed + static_cast<std::uint64_t>(match_));
  input_.reset();
  stats_ = {};
  phase_ = Phase::Playing;
  json enemies = json::array();
  for (const EntityState* e : state_.enemies()) enemies.push_back(e->id);
  const json config = {
      {"type", "config"},
      {"match", match_},
      {"seed", options_.seed + static_cast<std::uint64_t>(match_)},
      {"tick_hz", options_.tick_hz},
      {"arena", {{"width", game_.arena_width}, {"height", game_.arena_height}}},
      {"max_steps", game_.max_steps},
      {"entity_radius", game_.entity_radius},
      {"max_health", game_.max_health},
      {"ammo_capacity", game_.ammo_capacity},
      {"player_id", kPlayerId},
      {"enemy_ids", enemies},
  };
  ++match_;
  return {Frame{false, dump(config)}, snapshot_frame()};
}

std::vector<Frame> Session::on_message(const std::string& text) {
  if (phase_ == Phase::Closed) return {};
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    return fail("malformed message: not valid JSON");
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return fail("malformed message: missing string field 'type'");
  }
  const std::string type = msg["type"];

  if (phase_ == Phase::AwaitHello) {
    if (type != "hello") return fail("expected hello, got '" + type + "'");
    if (!msg.contains("version") || !msg["version"].is_number_integer()) {
      return fail("malformed hello: missing integer field 'version'");
    }
    if (msg["version"].get<long long>() != kProtocolVersion) {
      return fail("protocol version mismatch: server speaks " + std::to_string(kProtocolVersion));
    }
    if (msg.contains("fingerprint")) {
      if (!msg["fingerprint"].is_string()) return fail("malformed hello: fingerprint must be a string");
      if (msg["fingerprint"].get<std::string>() != fingerprint_) {
        return fail("checkpoint mismatch: server game fingerprint is " + fingerprint_);
      }
    }
    std::vector<Frame> out = {Frame{false, dump({{"type", "hello"},
                                                 {"version", kProtocolVersion},
                                                 {"fingerprint", fingerprint_}})}};
    for (Frame& f : start_match()) out.push_back(std::move(f));
    return out;
  }

  if (type == "input") {
    const bool ok = msg.contains("tick") && msg["tick"].is_number_integer() &&
                    msg.contains("move") && msg["move"].is_number_integer() &&
                    msg.contains("shoot") && msg["shoot"].is_boolean();
    if (!ok) return fail("malformed input: need integer tick, integer move, boolean shoot");
    const long long tick = msg["tick"].get<long long>();
    const long long move = msg["move"].get<long long>();
    if (move < 0 || move >= kNumMoveDirs) return fail("malformed input: move must be in 0..8");
    if (phase_ != Phase::Playing) return {};
    // Only inputs reacting to one of the last few snapshots are applied.
    if (tick > state_.tick || tick + kInputMaxAge < state_.tick) {
      ++discarded_;
      return {};
    }
    input_ = PendingInput{static_cast<int>(tick),
                          encode_action({static_cast<MoveDir>(move), msg["shoot"].get<bool>()})};
    return {};
  }
  if (type == "rematch") {
    if (phase_ != Phase::Ended) return fail("rematch is only valid after end");
    return start_match();
  }
  return fail("unexpected message type '" + type + "'");
}

std::vector<Frame> Session::tick() {
  if (phase_ != Phase::Playing) return {};
  std::map<EntityId, int> actions;
  if (input_ && input_->tick + kInputMaxAge >= state_.tick) {
    actions[kPlayerId] = input_->action;
  } else {
    input_.reset();
    actions[kPlayerId] = 0;
  }
  ModelPolicy agent(*model_, options_.head);
  for (const EntityState* e : state_.enemies()) {
    actions[e->id] = agent.act(observe(state_, e->id), agent_rng_);
  }
  StepResult res = step(state_, actions);
  for (const auto& [id, ev] : res.events) {
    const bool human = id == kPlayerId;
    (human ? stats_.human_shots : stats_.agent_shots) += ev.shots_fired;
    (human ? stats_.human_hits : stats_.agent_hits) += static_cast<int>(ev.hits_landed.size());
  }
  state_ = std::move(res.state);
  std::vector<Frame> out = {snapshot_frame()};
  if (outcome(state_) != Outcome::Ongoing) {
    phase_ = Phase::Ended;
    out.push_back(end_frame());
  }
  return out;
}

Frame Session::snapshot_frame() const {
  json entities = json::array();
  for (const EntityState& e : state_.entities) {
    entities.push_back({{"id", e.id},
                        {"kind", kind_name(e.kind)},
                        {"pos", vec(e.position)},
                        {"facing", vec(e.facing)},
                        {"health", e.health},
                        {"ammo", e.ammo},
                        {"cooldown", e.cooldown}});
  }
  json bullets = json::array();
  for (const Bullet& b : state_.bullets) {
    bullets.push_back({{"pos", vec(b.position)}, {"dir", vec(b.direction)}, {"owner", b.owner}});
  }
  json walls = json::array();
  for (const Wall& w : state_.walls) walls.push_back({{"min", vec(w.min_corner)}, {"max", vec(w.max_corner)}});
  const json snap = {{"type", "snapshot"},     {"tick", state_.tick},  {"entities", entities},
                     {"bullets", bullets},     {"walls", walls},
                     {"outcome", std::string(to_string(outcome(state_)))}};
  return Frame{true, dump(snap)};
}

Frame Session::end_frame() const {
  const Outcome o = outcome(state_);
  const json end = {{"type", "end"},
                    {"outcome", std::string(to_string(o))},
                    {"winner", winner_name(o)},
                    {"stats",
                     {{"ticks", state_.tick},
                      {"human_shots", stats_.human_shots},
                      {"human_hits", stats_.human_hits},
                      {"agent_shots", stats_.agent_shots},
                      {"agent_hits", stats_.agent_hits}}}};
  return Frame{false, dump(end)};
}

}  // namespace arena
