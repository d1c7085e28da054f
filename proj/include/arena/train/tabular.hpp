#pragma once

#include <vector>

#include "arena/rng.hpp"

namespace arena {

/// Finite MDP with dense transition probabilities. Terminal states end an
/// episode and have zero value.
struct TabularMdp {
  int states = 0;
  int actions = 0;
  double gamma = 0.9;
  std::vector<double> transition;  // [s][a][s'] flattened
  std::vector<double> reward;      // [s][a] expected immediate reward
  std::vector<bool> terminal;      // [s]

  TabularMdp(int states, int actions, double gamma);

  double& p(int s, int a, int next) { return transition[index(s, a) * states + next]; }
  double p(int s, int a, int next) const { return transition[index(s, a) * states + next]; }
  double& r(int s, int a) { return reward[index(s, a)]; }
  double r(int s, int a) const { return reward[index(s, a)]; }
  std::size_t index(int s, int a) const { return static_cast<std::size_t>(s * actions + a); }

  /// Throws std::invalid_argument unless every row is a distribution.
  void validate() const;
  /// Draws a successor state.
  int sample_next(int s, int a, Rng& rng) const;
};

struct ValueIterationResult {
  std::vector<double> values;  // [s]
  std::vector<double> q;       // [s][a] flattened
  int iterations = 0;
};

/// Iterates the Bellman optimality operator until the sup-norm change falls
/// below tolerance. Throws std::invalid_argument if max_iterations is hit.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tolerance = 1e-12,
                                     int max_iterations = 100000);

struct QLearningConfig {
  long episodes = 50000;
  int max_steps = 200;
  /// Step size alpha0 / n(s, a)^decay; decay 0 keeps it constant.
  double alpha0 = 0.5;
  double alpha_decay = 0.8;
  double epsilon = 0.5;
  /// Start each episode from a uniformly drawn non-terminal state.
  bool exploring_starts = true;
  int start_state = 0;
};

/// Off-policy one-step Q-learning with epsilon-greedy behavior. Returns the
/// Q table flattened [s][a].
std::vector<double> tabular_q_learning(const TabularMdp& mdp, const QLearningConfig& config,
                                       Rng& rng);

}  // namespace arena
