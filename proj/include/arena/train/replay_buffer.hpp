#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "arena/model/encoder.hpp"
#include "arena/rng.hpp"

namespace arena {

inline constexpr std::size_t kDefaultReplayCapacity = 20000;

/// Encoded features are shared so consecutive transitions store each state once.
struct Transition {
  std::shared_ptr<const EntityFeatureSet> state;
  int action = 0;
  double reward = 0.0;
  std::shared_ptr<const EntityFeatureSet> next;  // null when terminal
  bool terminal = false;
};

/// Fixed-capacity FIFO ring. Once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = kDefaultReplayCapacity);

  void push(Transition t);
  /// Uniform with replacement. Throws TrainingError when fewer than n are held.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  /// i-th oldest retained transition.
  const Transition& at(std::size_t i) const;
  void clear();

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
};

}  // namespace arena
