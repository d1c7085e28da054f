#include "arena/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "arena/errors.hpp"
#include "json.hpp"

namespace arena {

using nlohmann::json;

std::vector<int> DemoDataset::episodes() const {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.episode);
  return {ids.begin(), ids.end()};
}

DemoDataset record_demos(Policy& player, Policy& enemy, int n_episodes, const GameConfig& config,
                         std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("record_demos: n_episodes must be >= 1");
  DemoDataset ds;
  ds.config = config;
  ds.fingerprint = fingerprint(config);
  ds.sources = {player.name(), enemy.name()};
  for (int ep = 0; ep < n_episodes; ++ep) {
    GameState state = build_arena(config, seed + static_cast<std::uint64_t>(ep));
    Rng player_rng(seed + static_cast<std::uint64_t>(ep), 1);
    Rng enemy_rng(seed + static_cast<std::uint64_t>(ep), 2);
    while (outcome(state) == Outcome::Ongoing) {
      std::map<EntityId, int> actions;
      for (const auto& e : state.entities) {
        Observation obs = observe(state, e.id);
        const int a = e.kind == EntityKind::Player ? player.act(obs, player_rng)
                                                   : enemy.act(obs, enemy_rng);
        actions[e.id] = a;
        ds.samples.push_back({std::move(obs), a, ep, e.id, state.tick});
      }
      state = step(state, actions).state;
    }
  }
  return ds;
}

ActionHistogram action_histogram(const std::vector<DemoSample>& samples) {
  ActionHistogram h{};
  for (const auto& s : samples) ++h.at(static_cast<std::size_t>(s.action));
  return h;
}

ActionHistogram action_histogram(std::span<const int> actions) {
  ActionHistogram h{};
  for (int a : actions) ++h.at(static_cast<std::size_t>(a));
  return h;
}

ActionHistogram action_histogram(const DemoDataset& dataset) {
  return action_histogram(dataset.samples);
}

ActionWeights balanced_weights(const ActionHistogram& histogram) {
  ActionWeights w{};
  double total = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (histogram[a] < 0) throw std::invalid_argument("balanced_weights: negative count");
    if (histogram[a] > 0) {
      w[a] = 1.0 / static_cast<double>(histogram[a]);
      total += w[a];
    }
  }
  if (total == 0.0) throw std::invalid_argument("balanced_weights: histogram is empty");
  for (double& x : w) x /= total;
  return w;
}

WeightedSampler::WeightedSampler(const std::vector<DemoSample>& samples,
                                 const ActionWeights& weights) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_action_.at(static_cast<std::size_t>(samples[i].action)).push_back(i);
  }
  total_ = samples.size();
  finish(weights);
}

WeightedSampler::WeightedSampler(std::span<const int> actions, const ActionWeights& weights) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    by_action_.at(static_cast<std::size_t>(actions[i])).push_back(i);
  }
  total_ = actions.size();
  finish(weights);
}

void WeightedSampler::finish(const ActionWeights& weights) {
  double acc = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (weights[a] < 0.0 || !std::isfinite(weights[a])) {
      throw std::invalid_argument("WeightedSampler: weights must be finite and non-negative");
    }
    // Weights are per sample, so a class's mass scales with its size.
    acc += weights[a] * static_cast<double>(by_action_[a].size());
    cumulative_[a] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("WeightedSampler: no weight on any present action");
}

std::size_t WeightedSampler::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  int a = static_cast<int>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                           cumulative_.begin());
  // Guard against u landing on the final boundary or an empty class.
  a = std::min(a, kNumActions - 1);
  while (by_action_[a].empty()) --a;
  const auto& pool = by_action_[a];
  return pool[rng.uniform_int(pool.size())];
}

std::pair<DemoDataset, DemoDataset> split_dataset(const DemoDataset& dataset,
                                                  double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("split: validation fraction must be in (0, 1)");
  }
  std::vector<int> eps = dataset.episodes();
  const int n = static_cast<int>(eps.size());
  if (n < 2) throw std::invalid_argument("split: need at least 2 episodes, have " + std::to_string(n));
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(eps[i], eps[rng.uniform_int(i + 1)]);
  const int n_val =
      std::clamp(static_cast<int>(std::lround(validation_fraction * n)), 1, n - 1);
  const std::set<int> val(eps.begin(), eps.begin() + n_val);

  DemoDataset train = dataset;
  DemoDataset validation = dataset;
  train.samples.clear();
  validation.samples.clear();
  for (const auto& s : dataset.samples) {
    (val.count(s.episode) ? validation : train).samples.push_back(s);
  }
  return {std::move(train), std::move(validation)};
}

// ---------------------------------------------------------------------------
// Persistence.

namespace {

// Entities: [id, kind (0 player, 1 enemy), x, y, facing_x, facing_y, health,
// ammo, cooldown, reload_timer]. Bullets: [x, y, dir_x, dir_y, owner, speed,
// age]. Walls: [min_x, min_y, max_x, max_y].
json entity_json(const EntityState& e) {
  return json::array({e.id, static_cast<int>(e.kind), e.position.x, e.position.y, e.facing.x,
                      e.facing.y, e.health, e.ammo, e.cooldown, e.reload_timer});
}

void require_arity(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw std::invalid_argument(std::string(what) + " must be an array of " + std::to_string(n));
  }
}

EntityState entity_from(const json& j) {
  require_arity(j, 10, "entity");
  EntityState e;
  e.id = j[0].get<int>();
  const int kind = j[1].get<int>();
  if (kind != 0 && kind != 1) throw std::invalid_argument("bad entity kind");
  e.kind = static_cast<EntityKind>(kind);
  e.position = {j[2].get<double>(), j[3].get<double>()};
  e.facing = {j[4].get<double>(), j[5].get<double>()};
  e.health = j[6].get<int>();
  e.ammo = j[7].get<int>();
  e.cooldown = j[8].get<int>();
  e.reload_timer = j[9].get<int>();
  return e;
}

json observation_json(const Observation& o, json& rec) {
  json others = json::array();
  for (const auto& e : o.others) others.push_back(entity_json(e));
  json bullets = json::array();
  for (const auto& b : o.bullets) {
    bullets.push_back(json::array({b.position.x, b.position.y, b.direction.x, b.direction.y,
                                   b.owner, b.speed, b.age}));
  }
  json walls = json::array();
  for (const auto& w : o.walls) {
    walls.push_back(json::array({w.min_corner.x, w.min_corner.y, w.max_corner.x, w.max_corner.y}));
  }
  rec["self"] = entity_json(o.self);
  rec["others"] = std::move(others);
  rec["bullets"] = std::move(bullets);
  rec["walls"] = std::move(walls);
  return rec;
}

Observation observation_from(const json& j, int tick, const GameConfig& config) {
  Observation o;
  o.tick = tick;
  o.config = config;
  o.self = entity_from(j.at("self"));
  for (const auto& e : j.at("others")) o.others.push_back(entity_from(e));
  for (const auto& b : j.at("bullets")) {
    require_arity(b, 7, "bullet");
    o.bullets.push_back({{b[0].get<double>(), b[1].get<double>()},
                         {b[2].get<double>(), b[3].get<double>()},
                         b[4].get<int>(),
                         b[5].get<double>(),
                         b[6].get<int>()});
  }
  for (const auto& w : j.at("walls")) {
    require_arity(w, 4, "wall");
    o.walls.push_back(
        {{w[0].get<double>(), w[1].get<double>()}, {w[2].get<double>(), w[3].get<double>()}});
  }
  return o;
}

json config_json(const GameConfig& c) {
  return {{"arena_width", c.arena_width},     {"arena_height", c.arena_height},
          {"max_steps", c.max_steps},         {"n_enemies", c.n_enemies},
          {"move_speed", c.move_speed},       {"bullet_speed", c.bullet_speed},
          {"entity_radius", c.entity_radius}, {"shot_cooldown", c.shot_cooldown},
          {"ammo_capacity", c.ammo_capacity}, {"reload_ticks", c.reload_ticks},
          {"n_walls", c.n_walls},             {"wall_size_min", c.wall_size_min},
          {"wall_size_max", c.wall_size_max}, {"dodge_radius", c.dodge_radius},
          {"max_health", c.max_health}};
}

GameConfig config_from(const json& j) {
  GameConfig c;
  c.arena_width = j.at("arena_width").get<double>();
  c.arena_height = j.at("arena_height").get<double>();
  c.max_steps = j.at("max_steps").get<int>();
  c.n_enemies = j.at("n_enemies").get<int>();
  c.move_speed = j.at("move_speed").get<double>();
  c.bullet_speed = j.at("bullet_speed").get<double>();
  c.entity_radius = j.at("entity_radius").get<double>();
  c.shot_cooldown = j.at("shot_cooldown").get<int>();
  c.ammo_capacity = j.at("ammo_capacity").get<int>();
  c.reload_ticks = j.at("reload_ticks").get<int>();
  c.n_walls = j.at("n_walls").get<int>();
  c.wall_size_min = j.at("wall_size_min").get<double>();
  c.wall_size_max = j.at("wall_size_max").get<double>();
  c.dodge_radius = j.at("dodge_radius").get<double>();
  c.max_health = j.at("max_health").get<int>();
  return c;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const DemoDataset& ds) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    const json header = {{"schema", kDatasetSchema},   {"version", ds.version},
                         {"fingerprint", ds.fingerprint}, {"sources", ds.sources},
                         {"config", config_json(ds.config)}, {"samples", ds.samples.size()}};
    out << header.dump() << '\n';
    for (const auto& s : ds.samples) {
      json rec = {{"episode", s.episode}, {"agent", s.agent}, {"tick", s.tick},
                  {"action", s.action}};
      observation_json(s.observation, rec);
      out << rec.dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move dataset into place at " + path.string() + ": " + ec.message());
}

DemoDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  const std::string where = path.string();
  auto fail = [&](long line, const std::string& what) -> void {
    throw IoError(where + ":" + std::to_string(line) + ": " + what);
  };

  std::string text;
  long line_no = 1;
  if (!std::getline(in, text)) fail(1, "empty file, expected header");
  DemoDataset ds;
  std::size_t expected = 0;
  try {
    const json h = json::parse(text);
    if (h.at("schema").get<std::string>() != kDatasetSchema) fail(1, "not a demo dataset");
    ds.version = h.at("version").get<int>();
    if (ds.version != kDatasetVersion) {
      fail(1, "unsupported dataset version " + std::to_string(ds.version) + " (expected " +
                  std::to_string(kDatasetVersion) + ")");
    }
    ds.fingerprint = h.at("fingerprint").get<std::string>();
    ds.sources = h.at("sources").get<std::vector<std::string>>();
    ds.config = config_from(h.at("config"));
    expected = h.at("samples").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(1, std::string("malformed header: ") + e.what());
  }

  ds.samples.reserve(expected);
  std::map<std::pair<int, int>, int> last_tick;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) fail(line_no, "empty record");
    try {
      const json r = json::parse(text);
      DemoSample s;
      s.episode = r.at("episode").get<int>();
      s.agent = r.at("agent").get<int>();
      s.tick = r.at("tick").get<int>();
      s.action = r.at("action").get<int>();
      if (s.action < 0 || s.action >= kNumActions) {
        fail(line_no, "action " + std::to_string(s.action) + " out of range");
      }
      auto [it, fresh] = last_tick.try_emplace({s.episode, s.agent}, s.tick);
      if (!fresh) {
        if (s.tick <= it->second) fail(line_no, "ticks must increase within an episode");
        it->second = s.tick;
      }
      s.observation = observation_from(r, s.tick, ds.config);
      ds.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(line_no, std::string("malformed record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      fail(line_no, std::string("malformed record: ") + e.what());
    }
  }
  if (ds.samples.size() != expected) {
    fail(line_no, "truncated: header declares " + std::to_string(expected) + " samples, found " +
                      std::to_string(ds.samples.size()));
  }
  if (ds.fingerprint != fingerprint(ds.config)) {
    fail(1, "fingerprint does not match the embedded config");
  }
  return ds;
}

}  // namespace arena
