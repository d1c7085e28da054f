#include "arena/config/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "arena/errors.hpp"
#include "arena/format.hpp"

extern char** environ;

namespace arena {

namespace {

struct Binding {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T, class Acc>
Binding integer(Acc acc) {
  return {[acc](RunConfig& c, const std::string& v) {
            const long long x = parse_int(v);
            if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
                static_cast<unsigned long long>(x) >
                    static_cast<unsigned long long>(std::numeric_limits<T>::max())) {
              throw std::invalid_argument("out of range");
            }
            acc(c) = static_cast<T>(x);
          },
          [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); }};
}

template <class Acc>
Binding unsigned_integer(Acc acc) {
  return {[acc](RunConfig& c, const std::string& v) {
            if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char ch) {
                  return std::isdigit(ch) != 0;
                })) {
              throw std::invalid_argument("expected a non-negative integer");
            }
            acc(c) = std::stoull(v);
          },
          [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); }};
}

template <class Acc>
Binding real(Acc acc) {
  return {[acc](RunConfig& c, const std::string& v) { acc(c) = parse_double(v); },
          [acc](const RunConfig& c) { return format_double(acc(const_cast<RunConfig&>(c))); }};
}

template <class Acc>
Binding boolean(Acc acc) {
  return {[acc](RunConfig& c, const std::string& v) {
            if (v == "true" || v == "1") {
              acc(c) = true;
            } else if (v == "false" || v == "0") {
              acc(c) = false;
            } else {
              throw std::invalid_argument("expected true or false");
            }
          },
          [acc](const RunConfig& c) {
            return std::string(acc(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <class Acc>
Binding text(Acc acc) {
  return {[acc](RunConfig& c, const std::string& v) { acc(c) = v; },
          [acc](const RunConfig& c) { return acc(const_cast<RunConfig&>(c)); }};
}

std::vector<int> parse_widths(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  for (std::string part; std::getline(ss, part, ',');) {
    part.erase(0, part.find_first_not_of(' '));
    part.erase(part.find_last_not_of(' ') + 1);
    out.push_back(static_cast<int>(parse_int(part)));
  }
  if (out.empty()) throw std::invalid_argument("expected comma-separated widths");
  return out;
}

std::string join_widths(const std::vector<int>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

nn::OptimizerKind parse_optimizer_kind(const std::string& v) {
  if (v == "adam") return nn::OptimizerKind::Adam;
  if (v == "sgd") return nn::OptimizerKind::Sgd;
  throw std::invalid_argument("expected adam or sgd");
}

#define ACC(expr) [](RunConfig & c) -> auto& { return c.expr; }

const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> table = [] {
    std::map<std::string, Binding> b;
    b["seed"] = unsigned_integer(ACC(seed));

    b["game.arena_width"] = real(ACC(game.arena_width));
    b["game.arena_height"] = real(ACC(game.arena_height));
    b["game.max_steps"] = integer<int>(ACC(game.max_steps));
    b["game.n_enemies"] = integer<int>(ACC(game.n_enemies));
    b["game.move_speed"] = real(ACC(game.move_speed));
    b["game.bullet_speed"] = real(ACC(game.bullet_speed));
    b["game.entity_radius"] = real(ACC(game.entity_radius));
    b["game.shot_cooldown"] = integer<int>(ACC(game.shot_cooldown));
    b["game.ammo_capacity"] = integer<int>(ACC(game.ammo_capacity));
    b["game.reload_ticks"] = integer<int>(ACC(game.reload_ticks));
    b["game.n_walls"] = integer<int>(ACC(game.n_walls));
    b["game.wall_size_min"] = real(ACC(game.wall_size_min));
    b["game.wall_size_max"] = real(ACC(game.wall_size_max));
    b["game.dodge_radius"] = real(ACC(game.dodge_radius));
    b["game.max_health"] = integer<int>(ACC(game.max_health));

    b["model.preset"] = {
        [](RunConfig& c, const std::string& v) {
          // "custom" means the explicit model.* keys define the model.
          if (v != "custom") c.model = ModelConfig::preset(parse_model_preset(v));
        },
        [](const RunConfig& c) {
          for (ModelPreset p : {ModelPreset::Small, ModelPreset::Large}) {
            if (ModelConfig::preset(p) == c.model) return to_string(p);
          }
          return std::string("custom");
        }};
    b["model.embed_dim"] = integer<int>(ACC(model.embed_dim));
    b["model.trunk"] = {[](RunConfig& c, const std::string& v) { c.model.trunk = parse_widths(v); },
                        [](const RunConfig& c) { return join_widths(c.model.trunk); }};
    b["model.heads"] = integer<int>(ACC(model.heads));
    b["model.leaky_slope"] = real(ACC(model.leaky_slope));

    b["encoder.max_enemies"] = integer<int>(ACC(encoder.max_enemies));
    b["encoder.max_bullets"] = integer<int>(ACC(encoder.max_bullets));
    b["encoder.max_walls"] = integer<int>(ACC(encoder.max_walls));

    b["optimizer.kind"] = {
        [](RunConfig& c, const std::string& v) { c.optimizer.kind = parse_optimizer_kind(v); },
        [](const RunConfig& c) {
          return std::string(c.optimizer.kind == nn::OptimizerKind::Adam ? "adam" : "sgd");
        }};
    b["optimizer.learning_rate"] = real(ACC(optimizer.learning_rate));
    b["optimizer.decay_factor"] = real(ACC(optimizer.decay_factor));
    b["optimizer.decay_every"] = integer<long>(ACC(optimizer.decay_every));
    b["optimizer.beta1"] = real(ACC(optimizer.beta1));
    b["optimizer.beta2"] = real(ACC(optimizer.beta2));
    b["optimizer.epsilon"] = real(ACC(optimizer.epsilon));
    b["optimizer.max_grad_norm"] = real(ACC(optimizer.max_grad_norm));

    b["dqn.gamma"] = real(ACC(dqn.gamma));
    b["dqn.epsilon_start"] = real(ACC(dqn.epsilon_start));
    b["dqn.epsilon_end"] = real(ACC(dqn.epsilon_end));
    b["dqn.epsilon_decay_fraction"] = real(ACC(dqn.epsilon_decay_fraction));
    b["dqn.target_sync_interval"] = integer<int>(ACC(dqn.target_sync_interval));
    b["dqn.batch_size"] = integer<int>(ACC(dqn.batch_size));
    b["dqn.warmup"] = integer<int>(ACC(dqn.warmup));
    b["dqn.buffer_capacity"] = unsigned_integer(ACC(dqn.buffer_capacity));
    b["dqn.huber_delta"] = real(ACC(dqn.huber_delta));

    b["schedule.total_episodes"] = integer<int>(ACC(schedule.total_episodes));
    b["schedule.r_initial"] = real(ACC(schedule.r_initial));
    b["schedule.r_final"] = real(ACC(schedule.r_final));
    b["schedule.phase_length"] = integer<int>(ACC(schedule.phase_length));

    b["offline.batch_size"] = integer<int>(ACC(offline.batch_size));
    b["offline.batches"] = integer<int>(ACC(offline.batches_per_epoch));
    b["offline.balanced"] = boolean(ACC(offline.balanced));

    b["rewards.kind"] = {
        [](RunConfig& c, const std::string& v) { c.reward_kind = parse_reward_kind(v); },
        [](const RunConfig& c) { return to_string(c.reward_kind); }};
    b["rewards.hit_enemy"] = real(ACC(rewards.hit_enemy));
    b["rewards.kill"] = real(ACC(rewards.kill));
    b["rewards.got_hit"] = real(ACC(rewards.got_hit));
    b["rewards.death"] = real(ACC(rewards.death));
    b["rewards.win"] = real(ACC(rewards.win));
    b["rewards.timeout"] = real(ACC(rewards.timeout));
    b["rewards.wall_bump"] = real(ACC(rewards.wall_bump));
    b["rewards.dodge"] = real(ACC(rewards.dodge));
    b["rewards.wasted_shot"] = real(ACC(rewards.wasted_shot));
    b["rewards.approach_per_px"] = real(ACC(rewards.approach_per_px));
    b["rewards.positional_clamp"] = real(ACC(rewards.positional_clamp));

    b["train.checkpoint_every"] = integer<int>(ACC(checkpoint_every));

    b["collect.episodes"] = integer<int>(ACC(collect.episodes));
    b["collect.player"] = text(ACC(collect.player));
    b["collect.enemy"] = text(ACC(collect.enemy));

    b["pretrain.epochs"] = integer<int>(ACC(pretrain.epochs));
    b["pretrain.validation_fraction"] = real(ACC(pretrain.validation_fraction));
    b["pretrain.batch_size"] = integer<int>(ACC(pretrain.bc.batch_size));
    b["pretrain.batches_per_epoch"] = integer<int>(ACC(pretrain.bc.batches_per_epoch));
    b["pretrain.balanced"] = boolean(ACC(pretrain.bc.balanced));

    b["eval.episodes"] = integer<int>(ACC(eval.episodes));
    b["eval.seed"] = unsigned_integer(ACC(eval.seed));

    b["play.port"] = integer<int>(ACC(play.port));
    b["play.tick_hz"] = integer<int>(ACC(play.tick_hz));
    b["play.opponent_head"] = text(ACC(play.opponent_head));

    b["paths.dataset"] = text(ACC(paths.dataset));
    b["paths.model"] = text(ACC(paths.model));
    b["paths.out"] = text(ACC(paths.out));
    return b;
  }();
  return table;
}

#undef ACC

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = bindings().find(key);
  if (it == bindings().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second.set(*this, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value '" + value + "' for '" + key + "': " + e.what());
  }
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = bindings().find(key);
  if (it == bindings().end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [key, _] : bindings()) out.push_back(key);
    return out;
  }();
  return k;
}

void RunConfig::validate() const {
  game.validate();
  model.validate();
  encoder.validate();
  optimizer.validate();
  dqn.validate();
  schedule.validate();
  offline.validate();
  rewards.validate();
  pretrain.bc.validate();
  if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
  if (collect.episodes < 1) throw ConfigError("collect.episodes must be >= 1");
  if (pretrain.epochs < 0) throw ConfigError("pretrain.epochs must be >= 0");
  if (!(pretrain.validation_fraction > 0.0 && pretrain.validation_fraction < 1.0)) {
    throw ConfigError("pretrain.validation_fraction must be in (0, 1)");
  }
  if (eval.episodes < 1) throw ConfigError("eval.episodes must be >= 1");
  if (play.port < 0 || play.port > 65535) throw ConfigError("play.port must be in [0, 65535]");
  if (play.tick_hz < 1 || play.tick_hz > 1000) throw ConfigError("play.tick_hz must be in [1, 1000]");
  if (play.opponent_head != "q" && play.opponent_head != "imitation") {
    throw ConfigError("play.opponent_head must be q or imitation");
  }
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + get(key) + "\n";
  return out;
}

HybridConfig RunConfig::hybrid() const {
  HybridConfig h;
  h.schedule = schedule;
  h.dqn = dqn;
  h.offline = offline;
  h.optimizer = optimizer;
  h.reward = reward_kind;
  h.weights = rewards;
  h.game = game;
  h.seed = seed;
  return h;
}

bool RunConfig::operator==(const RunConfig& other) const {
  return canonical_text() == other.canonical_text();
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  struct Entry {
    int line;
    std::string key, value;
  };
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e{line_no, trim(t.substr(0, eq)), trim(t.substr(eq + 1))};
    if (auto [it, fresh] = seen.emplace(e.key, line_no); !fresh) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + e.key +
                        "' (first set on line " + std::to_string(it->second) + ")");
    }
    entries.push_back(std::move(e));
  }
  // A preset rewrites every model field, so it must not clobber explicit ones.
  std::stable_partition(entries.begin(), entries.end(),
                        [](const Entry& e) { return e.key == "model.preset"; });
  RunConfig config;
  for (const auto& e : entries) {
    try {
      config.set(e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(source + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::string env_var_name(const std::string& key) {
  std::string out = "ARENA_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

void apply_env_overrides(RunConfig& config, const std::map<std::string, std::string>& env) {
  std::map<std::string, std::string> by_var;
  for (const auto& key : RunConfig::keys()) by_var[env_var_name(key)] = key;
  for (const auto& [var, value] : env) {
    if (var.rfind("ARENA_", 0) != 0 || var == "ARENA_LOG") continue;
    const auto it = by_var.find(var);
    if (it == by_var.end()) throw ConfigError("unknown environment override " + var);
    try {
      config.set(it->second, value);
    } catch (const ConfigError& e) {
      throw ConfigError(var + ": " + e.what());
    }
  }
}

std::map<std::string, std::string> arena_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    if (name.rfind("ARENA_", 0) == 0) out[name] = entry.substr(eq + 1);
  }
  return out;
}

}  // namespace arena
