#pragma once

// Table-lookup iteration schemes: plain VI, model VI, subgoal VI with
// termination and initiation sets, and joint multi-subgoal VI. All sweeps are
// synchronous (Jacobi); argmax ties go to the lowest index in the candidate
// list (primitives first, then goal models in declaration order).

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hvi/model.hpp"

namespace hvi {

struct SolveOptions {
  double eps = 1e-9;
  /// Sweep cap; 0 selects 10 n + 1000.
  Index cap = 0;
  /// When set, hitting the cap returns the current iterate (converged = false)
  /// instead of throwing. Used for deliberately truncated subgoal training.
  bool truncate = false;
};

struct SolveReport {
  Index iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

/// Subgoal value per state, in reward units. Same layout as a value function.
template <typename Scalar>
struct SubgoalSpec {
  std::string name;
  ValueFunction<Scalar> G;
};

/// Binary termination condition per state.
struct TerminationVector {
  std::vector<std::uint8_t> beta;

  Index size() const { return Index(beta.size()); }
  bool operator[](Index i) const { return beta[std::size_t(i)] != 0; }
  bool operator==(const TerminationVector&) const = default;
};

/// allowed[a][i] says whether action a may be chosen in state i. An empty
/// set places no restriction.
struct InitiationSets {
  std::vector<std::vector<std::uint8_t>> allowed;

  bool empty() const { return allowed.empty(); }
  bool allows(Index a, Index i) const {
    return allowed.empty() || std::size_t(a) >= allowed.size() || allowed[std::size_t(a)][std::size_t(i)] != 0;
  }
};

namespace detail {

inline Index resolve_cap(const SolveOptions& o, Index n) { return o.cap > 0 ? o.cap : 10 * n + 1000; }

inline void check_options(const SolveOptions& o) {
  if (!(o.eps > 0.0)) throw std::invalid_argument("solver: eps must be positive");
}

inline void check_initiation(const InitiationSets& init, Index actions, Index n) {
  if (init.empty()) return;
  if (Index(init.allowed.size()) > actions) throw DimensionError("initiation sets: more masks than actions");
  for (const auto& mask : init.allowed)
    if (Index(mask.size()) != n) throw DimensionError("initiation sets: mask size differs from state count");
  for (Index i = 0; i < n; ++i) {
    bool any = false;
    for (Index a = 0; a < actions && !any; ++a) any = init.allows(a, i);
    if (!any) throw std::invalid_argument("initiation sets: state " + std::to_string(i) + " has no allowed action");
  }
}

[[noreturn]] inline void cap_exceeded(const char* who, Index cap, double residual) {
  throw ConvergenceError(std::string(who) + ": no convergence after " + std::to_string(cap) +
                         " sweeps (residual " + std::to_string(residual) + ")");
}

/// Per-chunk maximum folded after the parallel region; max is order-free.
struct ResidualSlots {
  explicit ResidualSlots(int chunks) : v(std::size_t(chunks), 0.0) {}
  double max() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  }
  std::vector<double> v;
};

/// Row i of A * B(beta, M): identity rows where beta is set, M rows elsewhere.
template <typename Scalar>
Scalar terminated_compose_row(const RowView<Scalar>& a_row, Scalar a_reward, const TerminationVector& beta,
                              const MatrixModel<Scalar>& m, RowAccumulator<Scalar>& acc) {
  Scalar r = a_reward;
  a_row.for_each([&](Index j, Scalar p) {
    if (beta[j]) {
      acc.add(j, p);
    } else {
      r += p * m.reward()[j];
      acc.add_row(m.row(j), p);
    }
  });
  return r;
}

}  // namespace detail

/// Synchronous Bellman optimality sweeps from v0 until the sup-norm change
/// drops below eps. The reported count includes the final sweep that detects
/// convergence.
template <typename Scalar>
std::pair<ValueFunction<Scalar>, SolveReport> plain_vi(const Mdp<Scalar>& mdp, const ValueFunction<Scalar>& v0,
                                                       const SolveOptions& opts = {},
                                                       const InitiationSets& init = {}) {
  detail::check_options(opts);
  const Index n = mdp.size();
  if (v0.size() != n) throw DimensionError("plain_vi: initial value size mismatch");
  detail::check_initiation(init, mdp.action_count(), n);
  const Index cap = detail::resolve_cap(opts, n);

  VectorX<Scalar> v = v0.values(), next(n);
  SolveReport rep;
  const int chunks = chunk_count(n);
  while (true) {
    detail::ResidualSlots res(chunks);
    parallel_chunks(n, [&](int c, Index b, Index e) {
      double r = 0.0;
      for (Index i = b; i < e; ++i) {
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (Index a = 0; a < mdp.action_count(); ++a) {
          if (!init.allows(a, i)) continue;
          const auto& A = mdp.action(a);
          const Scalar q = A.reward()[i] + A.row(i).dot(v);
          if (q > best) best = q;
        }
        next[i] = best;
        r = std::max(r, double(std::abs(best - v[i])));
      }
      res.v[std::size_t(c)] = r;
    });
    v.swap(next);
    ++rep.iterations;
    rep.residual = res.max();
    if (rep.residual < opts.eps) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cap) {
      if (opts.truncate) break;
      detail::cap_exceeded("plain_vi", cap, rep.residual);
    }
  }
  return {ValueFunction<Scalar>(std::move(v)), rep};
}

/// Index of the maximizing candidate per state, over primitives then extra
/// models, evaluated as R(i) + P(i,:) V.
template <typename Scalar>
std::vector<Index> greedy_actions(const Mdp<Scalar>& mdp, const std::vector<MatrixModel<Scalar>>& extra,
                                  const ValueFunction<Scalar>& v, const InitiationSets& init = {}) {
  const Index n = mdp.size();
  if (v.size() != n) throw DimensionError("greedy_actions: value size mismatch");
  for (const auto& m : extra)
    if (m.size() != n) throw DimensionError("greedy_actions: extra model size mismatch");
  const Index total = mdp.action_count() + Index(extra.size());
  std::vector<Index> choice(std::size_t(n), 0);
  for (Index i = 0; i < n; ++i) {
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (Index a = 0; a < total; ++a) {
      if (!init.allows(a, i)) continue;
      const auto& M = a < mdp.action_count() ? mdp.action(a) : extra[std::size_t(a - mdp.action_count())];
      const Scalar q = M.reward()[i] + M.row(i).dot(v.values());
      if (q > best) {
        best = q;
        choice[std::size_t(i)] = a;
      }
    }
  }
  return choice;
}

/// Model whose row i is the row of the action (or extra model) that is greedy
/// with respect to V. Used to warm-start model_vi.
template <typename Scalar>
MatrixModel<Scalar> greedy_model(const Mdp<Scalar>& mdp, const std::vector<MatrixModel<Scalar>>& extra,
                                 const ValueFunction<Scalar>& v) {
  const auto choice = greedy_actions(mdp, extra, v);
  const Index n = mdp.size();
  SparseRowsBuilder<Scalar> b(n);
  VectorX<Scalar> reward(n);
  for (Index i = 0; i < n; ++i) {
    const Index a = choice[std::size_t(i)];
    const auto& M = a < mdp.action_count() ? mdp.action(a) : extra[std::size_t(a - mdp.action_count())];
    reward[i] = M.reward()[i];
    b.push_row(M.row(i));
  }
  return unchecked_model(std::move(reward), std::move(b).finish());
}

/// Model VI: per state pick the action maximizing the reward part of
/// A_a M_k, and take that row of A_a M_k. Monitors the reward part.
template <typename Scalar>
std::pair<MatrixModel<Scalar>, SolveReport> model_vi(const Mdp<Scalar>& mdp, const MatrixModel<Scalar>& m0,
                                                     const SolveOptions& opts = {}) {
  detail::check_options(opts);
  const Index n = mdp.size();
  if (m0.size() != n) throw DimensionError("model_vi: initial model size mismatch");
  const Index cap = detail::resolve_cap(opts, n);

  MatrixModel<Scalar> m = m0;
  SolveReport rep;
  while (true) {
    const VectorX<Scalar>& rk = m.reward();
    MatrixModel<Scalar> next = detail::build_rows<Scalar>(n, [&](Index i, RowAccumulator<Scalar>& acc) {
      Index arg = 0;
      Scalar best = -std::numeric_limits<Scalar>::infinity();
      for (Index a = 0; a < mdp.action_count(); ++a) {
        const auto& A = mdp.action(a);
        const Scalar q = A.reward()[i] + A.row(i).dot(rk);
        if (q > best) {
          best = q;
          arg = a;
        }
      }
      return detail::compose_row(mdp.action(arg), i, m, acc);
    });
    ++rep.iterations;
    rep.residual = n > 0 ? double((next.reward() - rk).cwiseAbs().maxCoeff()) : 0.0;
    m = std::move(next);
    if (rep.residual < opts.eps) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cap) {
      if (opts.truncate) break;
      detail::cap_exceeded("model_vi", cap, rep.residual);
    }
  }
  return {std::move(m), rep};
}

template <typename Scalar>
std::pair<MatrixModel<Scalar>, SolveReport> model_vi(const Mdp<Scalar>& mdp, const SolveOptions& opts = {}) {
  return model_vi(mdp, MatrixModel<Scalar>::identity(mdp.size()), opts);
}

/// M G with the implicit leading 1: R + P G.
template <typename Scalar>
VectorX<Scalar> model_times_goal(const MatrixModel<Scalar>& m, const ValueFunction<Scalar>& g) {
  VectorX<Scalar> out(m.size());
  for (Index i = 0; i < m.size(); ++i) out[i] = m.reward()[i] + m.row(i).dot(g.values());
  return out;
}

/// Termination from the linear objective over beta in [0, 1]: the optimum
/// sits at an endpoint. Ties terminate.
template <typename Scalar>
TerminationVector terminate_beta_from(const VectorX<Scalar>& predicted, const ValueFunction<Scalar>& g) {
  if (predicted.size() != g.size()) throw DimensionError("terminate_beta: size mismatch");
  TerminationVector t;
  t.beta.resize(std::size_t(g.size()));
  for (Index i = 0; i < g.size(); ++i) t.beta[std::size_t(i)] = g[i] >= predicted[i] ? 1 : 0;
  return t;
}

template <typename Scalar>
TerminationVector terminate_beta(const MatrixModel<Scalar>& m, const SubgoalSpec<Scalar>& g) {
  if (m.size() != g.G.size()) throw DimensionError("terminate_beta: size mismatch");
  return terminate_beta_from(model_times_goal(m, g.G), g.G);
}

/// B = beta I + (I - beta) M.
template <typename Scalar>
MatrixModel<Scalar> b_matrix(const TerminationVector& beta, const MatrixModel<Scalar>& m) {
  if (beta.size() != m.size()) throw DimensionError("b_matrix: size mismatch");
  const Index n = m.size();
  SparseRowsBuilder<Scalar> b(n);
  VectorX<Scalar> reward(n);
  for (Index i = 0; i < n; ++i) {
    if (beta[i]) {
      reward[i] = Scalar(0);
      b.push_unit(i);
    } else {
      reward[i] = m.reward()[i];
      b.push_row(m.row(i));
    }
  }
  return unchecked_model(std::move(reward), std::move(b).finish());
}

namespace detail {

/// Shared sweep machinery for single- and multi-goal subgoal VI. Candidates
/// for goal q are the primitive actions followed by every current goal model
/// when `share_models` is set.
template <typename Scalar>
std::pair<std::vector<MatrixModel<Scalar>>, SolveReport> subgoal_sweeps(
    const Mdp<Scalar>& mdp, const std::vector<SubgoalSpec<Scalar>>& goals, const InitiationSets& init,
    const SolveOptions& opts, bool share_models, const char* who) {
  check_options(opts);
  const Index n = mdp.size();
  if (goals.empty()) throw std::invalid_argument(std::string(who) + ": at least one goal required");
  for (const auto& g : goals)
    if (g.G.size() != n) throw DimensionError(std::string(who) + ": subgoal size mismatch");
  check_initiation(init, mdp.action_count(), n);
  const Index cap = resolve_cap(opts, n);
  const std::size_t gcount = goals.size();

  std::vector<MatrixModel<Scalar>> models(gcount, MatrixModel<Scalar>::identity(n));
  std::vector<VectorX<Scalar>> predicted(gcount);
  for (std::size_t q = 0; q < gcount; ++q) predicted[q] = goals[q].G.values();

  SolveReport rep;
  while (true) {
    std::vector<TerminationVector> beta(gcount);
    std::vector<VectorX<Scalar>> w(gcount);
    for (std::size_t q = 0; q < gcount; ++q) {
      beta[q] = terminate_beta_from(predicted[q], goals[q].G);
      w[q] = VectorX<Scalar>(n);
      for (Index i = 0; i < n; ++i) w[q][i] = beta[q][i] ? goals[q].G[i] : predicted[q][i];
    }

    std::vector<MatrixModel<Scalar>> next_models;
    std::vector<VectorX<Scalar>> next_pred(gcount, VectorX<Scalar>(n));
    double residual = 0.0;
    for (std::size_t q = 0; q < gcount; ++q) {
      const VectorX<Scalar>& wq = w[q];
      next_models.push_back(build_rows<Scalar>(n, [&](Index i, RowAccumulator<Scalar>& acc) {
        const MatrixModel<Scalar>* arg = nullptr;
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (Index a = 0; a < mdp.action_count(); ++a) {
          if (!init.allows(a, i)) continue;
          const auto& A = mdp.action(a);
          const Scalar v = A.reward()[i] + A.row(i).dot(wq);
          if (v > best) {
            best = v;
            arg = &A;
          }
        }
        if (share_models) {
          for (const auto& O : models) {
            const Scalar v = O.reward()[i] + O.row(i).dot(wq);
            if (v > best) {
              best = v;
              arg = &O;
            }
          }
        }
        next_pred[q][i] = best;
        return terminated_compose_row(arg->row(i), arg->reward()[i], beta[q], models[q], acc);
      }));
      residual = std::max(residual, n > 0 ? double((next_pred[q] - predicted[q]).cwiseAbs().maxCoeff()) : 0.0);
    }
    models = std::move(next_models);
    predicted = std::move(next_pred);
    ++rep.iterations;
    rep.residual = residual;
    if (residual < opts.eps) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cap) {
      if (opts.truncate) break;
      cap_exceeded(who, cap, residual);
    }
  }
  return {std::move(models), rep};
}

}  // namespace detail

/// Subgoal VI with termination: each sweep computes beta_k from M_k and G,
/// forms B(beta_k, M_k), and sets row i of M_{k+1} to A_a(i,:) B for the
/// allowed action maximizing A_a(i,:) B G. Monitors M G.
template <typename Scalar>
std::pair<MatrixModel<Scalar>, SolveReport> subgoal_vi(const Mdp<Scalar>& mdp, const SubgoalSpec<Scalar>& g,
                                                       const InitiationSets& init = {},
                                                       const SolveOptions& opts = {}) {
  auto [models, rep] = detail::subgoal_sweeps(mdp, std::vector<SubgoalSpec<Scalar>>{g}, init, opts, false,
                                              "subgoal_vi");
  return {std::move(models.front()), rep};
}

/// Joint subgoal VI: the candidate set for every goal is the primitive
/// actions plus all goal models of the previous sweep.
template <typename Scalar>
std::pair<std::vector<MatrixModel<Scalar>>, SolveReport> multi_subgoal_vi(
    const Mdp<Scalar>& mdp, const std::vector<SubgoalSpec<Scalar>>& goals, const SolveOptions& opts = {}) {
  return detail::subgoal_sweeps(mdp, goals, InitiationSets{}, opts, true, "multi_subgoal_vi");
}

/// Initial values below V* for proper problems: 0 at the sink, and a large
/// negative constant elsewhere (min reward / (1 - gamma) when discounted).
template <typename Scalar>
ValueFunction<Scalar> pessimistic_start(const Mdp<Scalar>& mdp) {
  const Index n = mdp.size();
  Scalar floor;
  if (mdp.gamma() < Scalar(1)) {
    Scalar rmin(0);
    for (const auto& a : mdp.actions())
      if (n > 0) rmin = std::min(rmin, a.reward().minCoeff());
    floor = rmin / (Scalar(1) - mdp.gamma());
  } else {
    floor = -Scalar(2) * std::max(mdp.max_abs_reward(), Scalar(1)) * Scalar(n);
  }
  VectorX<Scalar> v = VectorX<Scalar>::Constant(n, floor);
  if (mdp.sink()) v[*mdp.sink()] = Scalar(0);
  return ValueFunction<Scalar>(std::move(v));
}

}  // namespace hvi
