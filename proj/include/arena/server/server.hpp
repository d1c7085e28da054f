#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "arena/server/session.hpp"

namespace arena {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  SessionOptions session;
};

/// Websocket host running one Session per connection on a single I/O thread.
/// Every connection starts from the same seed. Snapshots are delivered
/// latest-wins: a snapshot still queued when the next one is produced is
/// replaced, so slow clients never accumulate a backlog.
class PlayServer {
 public:
  /// The model must outlive the server; it is only read.
  PlayServer(const PolicyModel& model, GameConfig game, ServerOptions options);
  ~PlayServer();
  PlayServer(const PlayServer&) = delete;
  PlayServer& operator=(const PlayServer&) = delete;

  /// Binds and starts serving on a background thread. Throws IoError when the
  /// address cannot be bound.
  void start();
  /// Port actually bound; valid after start().
  unsigned short port() const;
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arena
