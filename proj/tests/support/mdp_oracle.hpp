#pragma once

// Small reference MDPs and an exhaustive-policy oracle for value checks.

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "arena/train/tabular.hpp"

namespace arena::testing {

/// One state, one self-loop action paying 1: V* = 1 / (1 - gamma).
inline TabularMdp self_loop_mdp(double gamma = 0.99) {
  TabularMdp m(1, 1, gamma);
  m.p(0, 0, 0) = 1.0;
  m.r(0, 0) = 1.0;
  return m;
}

/// States 0..n-1 with both ends terminal. Action 0 moves left, action 1
/// right; the move succeeds with probability 1 - slip and goes the other
/// way otherwise. Entering the right end pays 1.
inline TabularMdp random_walk_chain(int n = 5, double slip = 0.2, double gamma = 0.9) {
  TabularMdp m(n, 2, gamma);
  for (int s = 0; s < n; ++s) {
    if (s == 0 || s == n - 1) {
      m.terminal[s] = true;
      for (int a = 0; a < 2; ++a) m.p(s, a, s) = 1.0;
      continue;
    }
    for (int a = 0; a < 2; ++a) {
      const int intended = a == 0 ? s - 1 : s + 1;
      const int other = a == 0 ? s + 1 : s - 1;
      m.p(s, a, intended) += 1.0 - slip;
      m.p(s, a, other) += slip;
      m.r(s, a) = (intended == n - 1 ? 1.0 - slip : 0.0) + (other == n - 1 ? slip : 0.0);
    }
  }
  return m;
}

/// 3x3 grid, goal terminal in the bottom-right corner, step cost -0.1, and
/// a 10% chance of staying put. Actions: up, right, down, left.
inline TabularMdp slippery_grid(double gamma = 0.9) {
  TabularMdp m(9, 4, gamma);
  const int goal = 8;
  m.terminal[goal] = true;
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  for (int s = 0; s < 9; ++s) {
    for (int a = 0; a < 4; ++a) {
      if (s == goal) {
        m.p(s, a, s) = 1.0;
        continue;
      }
      const int r = std::clamp(s / 3 + dr[a], 0, 2);
      const int c = std::clamp(s % 3 + dc[a], 0, 2);
      const int next = r * 3 + c;
      m.p(s, a, next) += 0.9;
      m.p(s, a, s) += 0.1;
      m.r(s, a) = -0.1 + (next == goal ? 0.9 : 0.0);
    }
  }
  return m;
}

/// Dense random transitions and rewards, no terminal states.
inline TabularMdp random_dense_mdp(int states, int actions, double gamma, std::uint64_t seed) {
  TabularMdp m(states, actions, gamma);
  Rng rng(seed);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      double sum = 0.0;
      for (int n = 0; n < states; ++n) sum += (m.p(s, a, n) = rng.uniform(0.05, 1.0));
      for (int n = 0; n < states; ++n) m.p(s, a, n) /= sum;
      m.r(s, a) = rng.uniform(-1.0, 1.0);
    }
  }
  return m;
}

/// Exact value of a deterministic policy: solves (I - gamma P_pi) v = r_pi
/// with terminal states pinned to 0.
inline Eigen::VectorXd evaluate_policy(const TabularMdp& m, const std::vector<int>& policy) {
  const int n = m.states;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    if (m.terminal[s]) continue;
    b(s) = m.r(s, policy[s]);
    for (int t = 0; t < n; ++t) {
      if (!m.terminal[t]) a(s, t) -= m.gamma * m.p(s, policy[s], t);
    }
  }
  return a.fullPivLu().solve(b);
}

/// Optimal values by enumerating every deterministic stationary policy and
/// taking the state-wise maximum.
inline std::vector<double> brute_force_values(const TabularMdp& m) {
  std::vector<double> best(static_cast<std::size_t>(m.states), -1e300);
  std::vector<int> policy(static_cast<std::size_t>(m.states), 0);
  while (true) {
    const Eigen::VectorXd v = evaluate_policy(m, policy);
    for (int s = 0; s < m.states; ++s) best[s] = std::max(best[s], v(s));
    int i = 0;
    while (i < m.states && ++policy[i] == m.actions) policy[i++] = 0;
    if (i == m.states) break;
  }
  return best;
}

/// Q from state values by one Bellman backup.
inline std::vector<double> q_from_values(const TabularMdp& m, const std::vector<double>& v) {
  std::vector<double> q(static_cast<std::size_t>(m.states) * m.actions, 0.0);
  for (int s = 0; s < m.states; ++s) {
    for (int a = 0; a < m.actions; ++a) {
      double x = m.r(s, a);
      for (int t = 0; t < m.states; ++t) {
        if (!m.terminal[t]) x += m.gamma * m.p(s, a, t) * v[t];
      }
      q[m.index(s, a)] = x;
    }
  }
  return q;
}

/// Largest |Q - Q*| over non-terminal states.
inline double max_q_error(const TabularMdp& m, const std::vector<double>& q,
                          const std::vector<double>& q_star) {
  double worst = 0.0;
  for (int s = 0; s < m.states; ++s) {
    if (m.terminal[s]) continue;
    for (int a = 0; a < m.actions; ++a) {
      worst = std::max(worst, std::abs(q[m.index(s, a)] - q_star[m.index(s, a)]));
    }
  }
  return worst;
}

}  // namespace arena::testing
