#include "arena/eval/evaluation.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "arena/errors.hpp"
#include "arena/format.hpp"
#include "json.hpp"

namespace arena {

namespace {

using nlohmann::json;

Outcome parse_outcome(const std::string& s) {
  for (Outcome o : {Outcome::Ongoing, Outcome::Win, Outcome::Loss, Outcome::Timeout}) {
    if (to_string(o) == s) return o;
  }
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote");
  return out;
}

json episode_json(const EpisodeStats& e) {
  return {{"seed", e.seed},   {"outcome", std::string(to_string(e.outcome))},
          {"length", e.length}, {"reward", e.reward},
          {"shots", e.shots},   {"hits", e.hits}};
}

}  // namespace

bool EvalReport::same_summary(const EvalReport& o) const {
  return agent == o.agent && opponent == o.opponent && episodes == o.episodes && seed == o.seed &&
         win_rate == o.win_rate && loss_rate == o.loss_rate && timeout_rate == o.timeout_rate &&
         mean_length == o.mean_length && mean_reward == o.mean_reward &&
         reward_variance == o.reward_variance && shots == o.shots && hits == o.hits &&
         accuracy == o.accuracy;
}

EvalReport summarize(std::string agent, std::string opponent, std::uint64_t seed,
                     std::vector<EpisodeStats> episodes) {
  if (episodes.empty()) throw std::invalid_argument("summarize: no episodes");
  EvalReport r;
  r.agent = std::move(agent);
  r.opponent = std::move(opponent);
  r.seed = seed;
  r.episodes = static_cast<int>(episodes.size());
  long wins = 0, losses = 0, timeouts = 0, length_sum = 0;
  double reward_sum = 0.0;
  for (const auto& e : episodes) {
    wins += e.outcome == Outcome::Win;
    losses += e.outcome == Outcome::Loss;
    timeouts += e.outcome == Outcome::Timeout;
    length_sum += e.length;
    reward_sum += e.reward;
    r.shots += e.shots;
    r.hits += e.hits;
  }
  if (wins + losses + timeouts != r.episodes) {
    throw std::invalid_argument("summarize: unfinished episode in input");
  }
  const double n = static_cast<double>(r.episodes);
  r.win_rate = 100.0 * static_cast<double>(wins) / n;
  r.loss_rate = 100.0 * static_cast<double>(losses) / n;
  r.timeout_rate = 100.0 * static_cast<double>(timeouts) / n;
  r.mean_length = static_cast<double>(length_sum) / n;
  r.mean_reward = reward_sum / n;
  double ss = 0.0;
  for (const auto& e : episodes) ss += (e.reward - r.mean_reward) * (e.reward - r.mean_reward);
  r.reward_variance = ss / n;
  r.accuracy = r.shots > 0 ? static_cast<double>(r.hits) / static_cast<double>(r.shots) : 0.0;
  r.per_episode = std::move(episodes);
  return r;
}

EvalReport run_match(Policy& agent, Policy& opponent, int n_episodes, const GameConfig& config,
                     std::uint64_t seed, const RewardWeights& weights) {
  if (n_episodes < 1) throw std::invalid_argument("run_match: n_episodes must be >= 1");
  std::vector<EpisodeStats> rows;
  rows.reserve(static_cast<std::size_t>(n_episodes));
  for (int i = 0; i < n_episodes; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    Rng agent_rng(s, 1), opponent_rng(s, 2);
    GameState state = build_arena(config, s);
    EpisodeStats stats;
    stats.seed = s;
    while (outcome(state) == Outcome::Ongoing) {
      std::map<EntityId, int> actions;
      for (const auto& e : state.entities) {
        Policy& p = e.id == kPlayerId ? agent : opponent;
        actions[e.id] = p.act(observe(state, e.id), e.id == kPlayerId ? agent_rng : opponent_rng);
      }
      StepResult res = step(state, actions);
      const StepEvents& ev = res.events.at(kPlayerId);
      stats.reward += advanced_reward(ev, state, res.state, kPlayerId, weights).total;
      stats.shots += ev.shots_fired;
      stats.hits += static_cast<int>(ev.hits_landed.size());
      ++stats.length;
      state = std::move(res.state);
    }
    stats.outcome = outcome(state);
    rows.push_back(stats);
  }
  return summarize(agent.name(), opponent.name(), seed, std::move(rows));
}

double stability(std::span<const double> w) {
  if (w.size() < 2) throw std::invalid_argument("stability: need at least 2 windows");
  // Shifted by the first value so a constant series is exactly 0.
  const double n = static_cast<double>(w.size());
  double mean = 0.0;
  for (double x : w) mean += x - w[0];
  mean /= n;
  double ss = 0.0;
  for (double x : w) ss += (x - w[0] - mean) * (x - w[0] - mean);
  return ss / n;
}

std::vector<double> windowed_win_rates(std::span<const Outcome> outcomes, int window) {
  if (window < 1) throw std::invalid_argument("windowed_win_rates: window must be >= 1");
  std::vector<double> out;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t start = 0; start + w <= outcomes.size(); start += w) {
    int wins = 0;
    for (std::size_t i = start; i < start + w; ++i) wins += outcomes[i] == Outcome::Win;
    out.push_back(static_cast<double>(wins) / static_cast<double>(window));
  }
  return out;
}

ExportFormat parse_export_format(const std::string& text) {
  if (text == "csv" || text == "table") return ExportFormat::Table;
  if (text == "jsonl" || text == "records") return ExportFormat::Records;
  throw std::invalid_argument("unknown export format '" + text + "' (expected csv or jsonl)");
}

const std::vector<std::string>& report_table_columns() {
  static const std::vector<std::string> cols = {
      "Enemy Type",      "Win Rate (%)",       "Avg Episode Length (steps)",
      "Loss Rate (%)",   "Timeout Rate (%)",   "Avg Episode Reward",
      "Reward Variance", "Accuracy",           "Shots",
      "Hits",            "Episodes",           "Seed",
      "Agent"};
  return cols;
}

std::string export_reports(std::span<const EvalReport> reports, ExportFormat format) {
  if (reports.empty()) throw std::invalid_argument("export_reports: no reports");
  std::string out;
  if (format == ExportFormat::Table) {
    const auto& cols = report_table_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_field(cols[i]);
    out += "\n";
    for (const auto& r : reports) {
      const std::vector<std::string> fields = {
          r.opponent,
          format_double(r.win_rate),
          format_double(r.mean_length),
          format_double(r.loss_rate),
          format_double(r.timeout_rate),
          format_double(r.mean_reward),
          format_double(r.reward_variance),
          format_double(r.accuracy),
          std::to_string(r.shots),
          std::to_string(r.hits),
          std::to_string(r.episodes),
          std::to_string(r.seed),
          r.agent};
      for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
      out += "\n";
    }
    return out;
  }
  for (const auto& r : reports) {
    json rows = json::array();
    for (const auto& e : r.per_episode) rows.push_back(episode_json(e));
    const json j = {{"agent", r.agent},
                    {"opponent", r.opponent},
                    {"episodes", r.episodes},
                    {"seed", r.seed},
                    {"win_rate", r.win_rate},
                    {"loss_rate", r.loss_rate},
                    {"timeout_rate", r.timeout_rate},
                    {"mean_length", r.mean_length},
                    {"mean_reward", r.mean_reward},
                    {"reward_variance", r.reward_variance},
                    {"shots", r.shots},
                    {"hits", r.hits},
                    {"accuracy", r.accuracy},
                    {"per_episode", rows}};
    out += j.dump() + "\n";
  }
  return out;
}

void write_reports(const std::filesystem::path& path, std::span<const EvalReport> reports,
                   ExportFormat format) {
  const std::string text = export_reports(reports, format);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<EvalReport> parse_reports(const std::string& text, ExportFormat format,
                                      const std::string& source) {
  std::vector<EvalReport> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const auto& cols = report_table_columns();
  while (std::getline(in, line)) {
    ++line_no;
    try {
      if (format == ExportFormat::Table) {
        const auto fields = split_csv(line);
        if (line_no == 1) {
          if (fields != cols) throw std::invalid_argument("unexpected header");
          continue;
        }
        if (line.empty()) continue;
        if (fields.size() != cols.size()) {
          throw std::invalid_argument("expected " + std::to_string(cols.size()) + " fields, got " +
                                      std::to_string(fields.size()));
        }
        EvalReport r;
        r.opponent = fields[0];
        r.win_rate = parse_double(fields[1]);
        r.mean_length = parse_double(fields[2]);
        r.loss_rate = parse_double(fields[3]);
        r.timeout_rate = parse_double(fields[4]);
        r.mean_reward = parse_double(fields[5]);
        r.reward_variance = parse_double(fields[6]);
        r.accuracy = parse_double(fields[7]);
        r.shots = static_cast<long>(parse_int(fields[8]));
        r.hits = static_cast<long>(parse_int(fields[9]));
        r.episodes = static_cast<int>(parse_int(fields[10]));
        r.seed = static_cast<std::uint64_t>(parse_int(fields[11]));
        r.agent = fields[12];
        out.push_back(std::move(r));
      } else {
        if (line.empty()) continue;
        const json j = json::parse(line);
        EvalReport r;
        r.agent = j.at("agent").get<std::string>();
        r.opponent = j.at("opponent").get<std::string>();
        r.episodes = j.at("episodes").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.win_rate = j.at("win_rate").get<double>();
        r.loss_rate = j.at("loss_rate").get<double>();
        r.timeout_rate = j.at("timeout_rate").get<double>();
        r.mean_length = j.at("mean_length").get<double>();
        r.mean_reward = j.at("mean_reward").get<double>();
        r.reward_variance = j.at("reward_variance").get<double>();
        r.shots = j.at("shots").get<long>();
        r.hits = j.at("hits").get<long>();
        r.accuracy = j.at("accuracy").get<double>();
        for (const auto& e : j.at("per_episode")) {
          r.per_episode.push_back(EpisodeStats{e.at("seed").get<std::uint64_t>(),
                                               parse_outcome(e.at("outcome").get<std::string>()),
                                               e.at("length").get<int>(), e.at("reward").get<double>(),
                                               e.at("shots").get<int>(), e.at("hits").get<int>()});
        }
        out.push_back(std::move(r));
      }
    } catch (const std::exception& e) {
      throw IoError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (format == ExportFormat::Table && line_no == 0) throw IoError(source + ":1: missing header");
  return out;
}

}  // namespace arena
