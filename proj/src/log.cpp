#include "arena/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace arena::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("ARENA_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string v(env);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  if (v == "error") return Level::Error;
  if (v == "off") return Level::Off;
  return Level::Warn;
}

std::atomic<Level>& level_ref() {
  static std::atomic<Level> level{parse_env()};
  return level;
}

constexpr const char* kNames[] = {"debug", "info", "warn", "error"};

}  // namespace

Level threshold() { return level_ref().load(); }

void set_threshold(Level level) { level_ref().store(level); }

void write(Level level, std::string_view message) {
  if (level < threshold() || level == Level::Off) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::clog << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace arena::log
