#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arena/model/policy_model.hpp"
#include "arena/sim/game.hpp"

namespace arena {

inline constexpr int kProtocolVersion = 1;

/// Inputs whose tick is more than this many ticks behind the server are dropped.
inline constexpr int kInputMaxAge = 2;

/// One outgoing text message. Snapshots may be superseded before delivery.
struct Frame {
  bool snapshot = false;
  std::string text;

  bool operator==(const Frame&) const = default;
};

struct SessionOptions {
  int tick_hz = 30;
  std::uint64_t seed = 0;  // match k plays arena seed + k
  PolicyHead head = PolicyHead::Q;
};

/// Protocol state machine for one connection, free of any I/O. The human
/// drives the player entity; the model greedily drives every enemy. Message
/// layout: docs/protocol.md.
class Session {
 public:
  enum class Phase { AwaitHello, Playing, Ended, Closed };

  Session(const PolicyModel& model, GameConfig game, SessionOptions options);

  /// Handles one client message. A malformed or out-of-place message yields an
  /// error frame and closes the session.
  std::vector<Frame> on_message(const std::string& text);

  /// Advances one tick while playing; returns the snapshot, then End when the
  /// match finished. No-op in any other phase.
  std::vector<Frame> tick();

  Phase phase() const { return phase_; }
  bool closed() const { return phase_ == Phase::Closed; }
  const GameState& state() const { return state_; }
  int matches_started() const { return match_; }
  long inputs_discarded() const { return discarded_; }

 private:
  struct PendingInput {
    int tick = 0;
    int action = 0;
  };
  struct Stats {
    int human_shots = 0;
    int human_hits = 0;
    int agent_shots = 0;
    int agent_hits = 0;
  };

  std::vector<Frame> fail(const std::string& message);
  std::vector<Frame> start_match();
  Frame snapshot_frame() const;
  Frame end_frame() const;

  const PolicyModel* model_;
  GameConfig game_;
  SessionOptions options_;
  std::string fingerprint_;
  Phase phase_ = Phase::AwaitHello;
  GameState state_;
  std::optional<PendingInput> input_;
  Stats stats_;
  int match_ = 0;
  long discarded_ = 0;
  Rng agent_rng_;
};

}  // namespace arena
