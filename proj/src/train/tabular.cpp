#include "arena/train/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "arena/train/learners.hpp"

namespace arena {

TabularMdp::TabularMdp(int s, int a, double g) : states(s), actions(a), gamma(g) {
  if (s < 1 || a < 1) throw std::invalid_argument("TabularMdp: need at least one state and action");
  transition.assign(static_cast<std::size_t>(s) * a * s, 0.0);
  reward.assign(static_cast<std::size_t>(s) * a, 0.0);
  terminal.assign(static_cast<std::size_t>(s), false);
}

void TabularMdp::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("TabularMdp: gamma must be in [0, 1)");
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      double sum = 0.0;
      for (int n = 0; n < states; ++n) {
        if (p(s, a, n) < 0.0) throw std::invalid_argument("TabularMdp: negative probability");
        sum += p(s, a, n);
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("TabularMdp: row (" + std::to_string(s) + ", " +
                                    std::to_string(a) + ") sums to " + std::to_string(sum));
      }
    }
  }
}

int TabularMdp::sample_next(int s, int a, Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (int n = 0; n < states; ++n) {
    const double q = p(s, a, n);
    if (q <= 0.0) continue;
    acc += q;
    last = n;
    if (u < acc) return n;
  }
  return last;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tolerance, int max_iterations) {
  mdp.validate();
  ValueIterationResult out;
  out.values.assign(static_cast<std::size_t>(mdp.states), 0.0);
  out.q.assign(static_cast<std::size_t>(mdp.states) * mdp.actions, 0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    double change = 0.0;
    for (int s = 0; s < mdp.states; ++s) {
      for (int a = 0; a < mdp.actions; ++a) {
        double q = mdp.r(s, a);
        for (int n = 0; n < mdp.states; ++n) {
          if (!mdp.terminal[n]) q += mdp.gamma * mdp.p(s, a, n) * out.values[n];
        }
        out.q[mdp.index(s, a)] = q;
      }
    }
    for (int s = 0; s < mdp.states; ++s) {
      const double v = mdp.terminal[s] ? 0.0
                                       : *std::max_element(out.q.begin() + mdp.index(s, 0),
                                                           out.q.begin() + mdp.index(s, 0) + mdp.actions);
      change = std::max(change, std::abs(v - out.values[s]));
      out.values[s] = v;
    }
    out.iterations = it;
    if (change < tolerance) return out;
  }
  throw std::invalid_argument("value_iteration: no convergence within " +
                              std::to_string(max_iterations) + " iterations");
}

std::vector<double> tabular_q_learning(const TabularMdp& mdp, const QLearningConfig& c, Rng& rng) {
  mdp.validate();
  if (c.episodes < 1 || c.max_steps < 1) throw std::invalid_argument("q-learning: empty budget");
  std::vector<int> starts;
  for (int s = 0; s < mdp.states; ++s) {
    if (!mdp.terminal[s]) starts.push_back(s);
  }
  if (starts.empty()) throw std::invalid_argument("q-learning: every state is terminal");
  std::vector<double> q(static_cast<std::size_t>(mdp.states) * mdp.actions, 0.0);
  std::vector<long> visits(q.size(), 0);
  for (long ep = 0; ep < c.episodes; ++ep) {
    int s = c.exploring_starts ? starts[rng.uniform_int(starts.size())] : c.start_state;
    for (int t = 0; t < c.max_steps && !mdp.terminal[s]; ++t) {
      const std::span<const double> row(q.data() + mdp.index(s, 0),
                                        static_cast<std::size_t>(mdp.actions));
      const int a = select_epsilon(row, c.epsilon, rng);
      const int next = mdp.sample_next(s, a, rng);
      const double max_next =
          mdp.terminal[next] ? 0.0
                             : *std::max_element(q.begin() + mdp.index(next, 0),
                                                 q.begin() + mdp.index(next, 0) + mdp.actions);
      const std::size_t k = mdp.index(s, a);
      const double alpha = c.alpha0 / std::pow(static_cast<double>(++visits[k]), c.alpha_decay);
      q[k] += alpha * (td_target(mdp.r(s, a), mdp.terminal[next], max_next, mdp.gamma) - q[k]);
      s = next;
    }
  }
  return q;
}

}  // namespace arena
