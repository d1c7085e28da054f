#include "arena/train/replay_buffer.hpp"

#include <stdexcept>
#include <string>

#include "arena/errors.hpp"

namespace arena {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n == 0 || items_.size() < n) {
    throw TrainingError("replay buffer holds " + std::to_string(items_.size()) +
                        " transitions, cannot sample " + std::to_string(n));
  }
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[rng.uniform_int(items_.size())]);
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay buffer index out of range");
  return items_[(cursor_ + i) % items_.size()];
}

void ReplayBuffer::clear() {
  items_.clear();
  cursor_ = 0;
}

}  // namespace arena
