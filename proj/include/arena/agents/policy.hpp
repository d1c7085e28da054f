#pragma once

#include <string>

#include "arena/rng.hpp"
#include "arena/sim/game.hpp"

namespace arena {

/// Anything that maps an observation to an action index in 0..17.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(const Observation& obs, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

/// Always emits the same action. Used for stalemate and recording tests.
class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(int action, std::string name = "Constant");
  int act(const Observation&, Rng&) override { return action_; }
  std::string name() const override { return name_; }

 private:
  int action_;
  std::string name_;
};

}  // namespace arena
