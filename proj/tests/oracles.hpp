#pragma once

// Reference implementations used only by the tests. None of them call the
// solver code under test: policy iteration on dense matrices, breadth-first
// search over semantic puzzle states, a Taxi simulator written from the rules,
// and a rollout driver.

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hvi/domains.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense discounted MDP: P[a] already includes gamma.
struct DenseMdp {
  std::vector<MatrixXd> P;
  std::vector<VectorXd> R;
  double gamma = 0.9;
  Eigen::Index n() const { return R.front().size(); }
};

/// Random instance drawn with a generator unrelated to the library's.
inline DenseMdp random_dense(std::uint64_t seed, Eigen::Index n, int actions, double gamma) {
  std::minstd_rand rng(static_cast<std::uint32_t>(seed * 2654435761u + 17));
  auto u = [&] { return double(rng() - rng.min()) / double(rng.max() - rng.min()); };
  DenseMdp m;
  m.gamma = gamma;
  for (int a = 0; a < actions; ++a) {
    MatrixXd p = MatrixXd::Zero(n, n);
    VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r[i] = 10 * u() - 5;
      const int k = 1 + int(rng() % 3);
      for (int s = 0; s < k; ++s) p(i, Eigen::Index(rng() % std::uint32_t(n))) += 0.1 + u();
      p.row(i) /= p.row(i).sum();
    }
    m.P.push_back(gamma * p);
    m.R.push_back(r);
  }
  return m;
}

inline hvi::MdpD to_mdp(const DenseMdp& d) {
  std::vector<hvi::ModelD> acts;
  std::vector<std::string> names;
  for (std::size_t a = 0; a < d.P.size(); ++a) {
    hvi::RowMajorSparse<double> p = (d.P[a] / d.gamma).sparseView();
    acts.push_back(hvi::make_model<double>(d.R[a], p, d.gamma));
    names.push_back("a" + std::to_string(a));
  }
  return hvi::MdpD(d.gamma, names, acts);
}

/// Howard policy iteration with exact linear solves; terminates when the
/// greedy policy is stable (ties keep the incumbent action).
inline VectorXd policy_iteration(const DenseMdp& m) {
  const Eigen::Index n = m.n();
  std::vector<int> pi(std::size_t(n), 0);
  VectorXd v;
  for (int it = 0; it < 1000; ++it) {
    MatrixXd a = MatrixXd::Identity(n, n);
    VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a.row(i) -= m.P[std::size_t(pi[std::size_t(i)])].row(i);
      b[i] = m.R[std::size_t(pi[std::size_t(i)])][i];
    }
    v = a.fullPivLu().solve(b);
    bool stable = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int cur = pi[std::size_t(i)];
      double best = m.R[std::size_t(cur)][i] + m.P[std::size_t(cur)].row(i).dot(v);
      for (int c = 0; c < int(m.P.size()); ++c) {
        const double q = m.R[std::size_t(c)][i] + m.P[std::size_t(c)].row(i).dot(v);
        if (q > best + 1e-12 * (1 + std::abs(best))) {
          best = q;
          pi[std::size_t(i)] = c;
          stable = false;
        }
      }
    }
    if (stable) return v;
  }
  throw std::runtime_error("policy_iteration: no convergence");
}

/// Breadth-first distances to `goal` in a graph given by a successor function.
template <typename State, typename Next>
std::map<State, int> bfs_distances(const State& goal, Next&& neighbours) {
  std::map<State, int> dist{{goal, 0}};
  std::deque<State> q{goal};
  while (!q.empty()) {
    const State s = q.front();
    q.pop_front();
    for (const State& t : neighbours(s))
      if (dist.emplace(t, dist[s] + 1).second) q.push_back(t);
  }
  return dist;
}

// ------------------------------------------------------------------ Hanoi

/// Legal single-disk moves between pegs (1-based), element 0 the smallest.
inline std::vector<std::vector<int>> hanoi_neighbours(const std::vector<int>& pegs) {
  std::vector<std::vector<int>> out;
  for (int from = 1; from <= 3; ++from)
    for (int to = 1; to <= 3; ++to) {
      if (from == to) continue;
      int top_from = -1, top_to = -1;
      for (int d = int(pegs.size()) - 1; d >= 0; --d) {
        if (pegs[std::size_t(d)] == from) top_from = d;
        if (pegs[std::size_t(d)] == to) top_to = d;
      }
      if (top_from < 0 || (top_to >= 0 && top_to < top_from)) continue;
      auto next = pegs;
      next[std::size_t(top_from)] = to;
      out.push_back(next);
    }
  return out;
}

// ---------------------------------------------------------------- 8-puzzle

inline std::vector<hvi::Board> puzzle_neighbours(const hvi::Board& b) {
  std::vector<hvi::Board> out;
  int blank = 0;
  while (b[std::size_t(blank)] != 0) ++blank;
  const int r = blank / 3, c = blank % 3;
  const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
  for (int k = 0; k < 4; ++k) {
    const int nr = r + dr[k], nc = c + dc[k];
    if (nr < 0 || nr > 2 || nc < 0 || nc > 2) continue;
    hvi::Board t = b;
    std::swap(t[std::size_t(blank)], t[std::size_t(nr * 3 + nc)]);
    out.push_back(t);
  }
  return out;
}

// -------------------------------------------------------------------- Taxi

/// Taxi rules restated from scratch, on semantic states.
struct TaxiSim {
  hvi::TaxiParams p;

  struct Step {
    std::optional<hvi::TaxiState> next;  // nullopt: episode over
    double reward;
  };

  bool wall(int row, int col, int dc) const {
    if (dc == 0) return false;
    const int left = dc > 0 ? col : col - 1;
    const bool rows01 = row <= 1 && left == 1;
    const bool rows34 = row >= 3 && (left == 0 || left == 2);
    return rows01 || rows34;
  }

  Step step(const hvi::TaxiState& s, int action) const {
    static const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, 1, -1};
    const hvi::Cell here{s.row, s.col};
    if (action < 4) {
      if (s.fuel == 0) return {std::nullopt, -20};
      hvi::TaxiState t = s;
      const int r = s.row + dr[action], c = s.col + dc[action];
      if (r >= 0 && r < 5 && c >= 0 && c < 5 && !wall(s.row, s.col, dc[action])) {
        t.row = r;
        t.col = c;
      }
      t.fuel -= 1;
      return {t, -1};
    }
    if (action == 4) {
      if (s.passenger < 4 && p.depots[std::size_t(s.passenger)] == here) {
        hvi::TaxiState t = s;
        t.passenger = 4;
        return {t, -1};
      }
      return {s, -10};
    }
    if (action == 5) {
      if (s.passenger == 4 && p.depots[std::size_t(s.destination)] == here) return {std::nullopt, 20};
      return {s, -10};
    }
    if (here == p.pump) {
      hvi::TaxiState t = s;
      t.fuel = p.fuel_max;
      return {t, -1};
    }
    return {s, -10};
  }

  /// Deterministic V* by repeated relaxation over the semantic states
  /// (every cycle has negative reward, so this terminates).
  std::map<std::array<int, 5>, double> optimal_values() const {
    std::map<std::array<int, 5>, double> v;
    std::vector<hvi::TaxiState> all;
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c)
        for (int ps = 0; ps < 5; ++ps)
          for (int d = 0; d < 4; ++d)
            for (int f = 0; f <= p.fuel_max; ++f) {
              all.push_back({r, c, ps, d, f});
              v[key(all.back())] = -1e9;
            }
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& s : all) {
        double best = -1e18;
        for (int a = 0; a < 7; ++a) {
          const Step st = step(s, a);
          best = std::max(best, st.reward + (st.next ? v[key(*st.next)] : 0.0));
        }
        if (best > v[key(s)]) {
          v[key(s)] = best;
          changed = true;
        }
      }
    }
    return v;
  }

  static std::array<int, 5> key(const hvi::TaxiState& s) { return {s.row, s.col, s.passenger, s.destination, s.fuel}; }
};

/// Shortest-path lengths (no walls crossed) from every cell to `target`.
inline std::array<int, 25> grid_distances(const TaxiSim& sim, hvi::Cell target) {
  std::array<int, 25> d;
  d.fill(-1);
  d[std::size_t(target.row * 5 + target.col)] = 0;
  std::deque<hvi::Cell> q{target};
  static const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, 1, -1};
  while (!q.empty()) {
    const hvi::Cell c = q.front();
    q.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int r = c.row + dr[k], col = c.col + dc[k];
      if (r < 0 || r >= 5 || col < 0 || col >= 5 || sim.wall(c.row, c.col, dc[k])) continue;
      if (d[std::size_t(r * 5 + col)] >= 0) continue;
      d[std::size_t(r * 5 + col)] = d[std::size_t(c.row * 5 + c.col)] + 1;
      q.push_back({r, col});
    }
  }
  return d;
}

}  // namespace oracle
