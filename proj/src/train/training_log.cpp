#include "arena/train/training_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "arena/errors.hpp"
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

EpisodeMode parse_mode(const std::string& s) {
  if (s == "offline") return EpisodeMode::Offline;
  if (s == "online") return EpisodeMode::Online;
  throw std::invalid_argument("unknown episode mode '" + s + "'");
}

}  // namespace

void TrainingLog::add(const EpochRecord& r) {
  if (r.epoch != static_cast<int>(epochs_.size())) {
    throw std::invalid_argument("training log: expected epoch " + std::to_string(epochs_.size()) +
                                ", got " + std::to_string(r.epoch));
  }
  epochs_.push_back(r);
}

void TrainingLog::add(const EpisodeRecord& r) {
  if (r.episode != static_cast<int>(episodes_.size())) {
    throw std::invalid_argument("training log: expected episode " +
                                std::to_string(episodes_.size()) + ", got " +
                                std::to_string(r.episode));
  }
  episodes_.push_back(r);
}

std::vector<EpisodeRecord> TrainingLog::online_episodes() const {
  std::vector<EpisodeRecord> out;
  for (const auto& e : episodes_) {
    if (e.mode == EpisodeMode::Online) out.push_back(e);
  }
  return out;
}

std::string TrainingLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs_) {
    json j = {{"kind", "epoch"},
              {"epoch", e.epoch},
              {"train_loss", e.train_loss},
              {"validation_loss", e.validation_loss},
              {"validation_accuracy", e.validation_accuracy},
              {"learning_rate", e.learning_rate}};
    out += j.dump() + "\n";
  }
  for (const auto& e : episodes_) {
    json j = {{"kind", "episode"},
              {"episode", e.episode},
              {"mode", to_string(e.mode)},
              {"length", e.length},
              {"reward_sum", e.reward_sum},
              {"outcome", std::string(to_string(e.outcome))},
              {"loss", e.loss},
              {"updates", e.updates},
              {"epsilon", e.epsilon},
              {"learning_rate", e.learning_rate}};
    out += j.dump() + "\n";
  }
  return out;
}

TrainingLog TrainingLog::from_jsonl(const std::string& text, const std::string& source) {
  TrainingLog log;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "epoch") {
        log.add(EpochRecord{j.at("epoch").get<int>(), j.at("train_loss").get<double>(),
                            j.at("validation_loss").get<double>(),
                            j.at("validation_accuracy").get<double>(),
                            j.at("learning_rate").get<double>()});
      } else if (kind == "episode") {
        EpisodeRecord r;
        r.episode = j.at("episode").get<int>();
        r.mode = parse_mode(j.at("mode").get<std::string>());
        r.length = j.at("length").get<int>();
        r.reward_sum = j.at("reward_sum").get<double>();
        r.outcome = parse_outcome(j.at("outcome").get<std::string>());
        r.loss = j.at("loss").get<double>();
        r.updates = j.at("updates").get<int>();
        r.epsilon = j.at("epsilon").get<double>();
        r.learning_rate = j.at("learning_rate").get<double>();
        log.add(r);
      } else {
        throw std::invalid_argument("unknown record kind '" + kind + "'");
      }
    } catch (const std::exception& e) {
      throw IoError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

void TrainingLog::write(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << to_jsonl();
    if (!out) throw IoError(path.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

TrainingLog TrainingLog::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str(), path.string());
}

}  // namespace arena
