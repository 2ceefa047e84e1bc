#pragma once

// Hard state aggregation: compression of action models into the aggregate
// MDP and the upscaling of an aggregate subgoal option into a valid macro
// model over the original states.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hvi/model.hpp"
#include "hvi/vi.hpp"

namespace hvi {

/// Hard aggregation phi: state -> aggregate. Phi is n x m one-hot, D is the
/// row-renormalized transpose (uniform over each pre-image).
class Aggregation {
 public:
  Aggregation() = default;

  Index original_size() const { return Index(map_.size()); }
  Index aggregate_size() const { return Index(count_.size()); }
  Index operator()(Index i) const { return map_[std::size_t(i)]; }
  const std::vector<std::int32_t>& map() const { return map_; }
  Index preimage_size(Index x) const { return count_[std::size_t(x)]; }
  std::optional<Index> sink() const { return sink_; }

  template <typename Scalar = double>
  RowMajorSparse<Scalar> phi_matrix() const {
    std::vector<Eigen::Triplet<Scalar, std::int64_t>> t;
    for (Index i = 0; i < original_size(); ++i) t.emplace_back(i, (*this)(i), Scalar(1));
    RowMajorSparse<Scalar> m(original_size(), aggregate_size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  template <typename Scalar = double>
  RowMajorSparse<Scalar> disaggregation_matrix() const {
    std::vector<Eigen::Triplet<Scalar, std::int64_t>> t;
    for (Index i = 0; i < original_size(); ++i)
      t.emplace_back((*this)(i), i, Scalar(1) / Scalar(preimage_size((*this)(i))));
    RowMajorSparse<Scalar> m(aggregate_size(), original_size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  friend Aggregation build_hard_aggregation(Index n, const std::vector<std::int32_t>& phi_map,
                                            std::optional<Index> sink);

 private:
  std::vector<std::int32_t> map_;
  std::vector<std::int32_t> count_;
  std::optional<Index> sink_;
};

/// `sink` is the original sink index, if any; it must map to an aggregate
/// state of its own.
Aggregation build_hard_aggregation(Index n, const std::vector<std::int32_t>& phi_map,
                                   std::optional<Index> sink = std::nullopt);

Aggregation identity_aggregation(Index n, std::optional<Index> sink = std::nullopt);

/// Aggregate model [[1,0],[D R, D P Phi]].
template <typename Scalar>
MatrixModel<Scalar> compress_action(const MatrixModel<Scalar>& a, const Aggregation& agg) {
  if (a.size() != agg.original_size()) throw DimensionError("compress_action: model size differs from aggregation");
  const Index m = agg.aggregate_size();
  std::vector<std::vector<std::int32_t>> members(static_cast<std::size_t>(m));
  for (Index i = 0; i < agg.original_size(); ++i) members[std::size_t(agg(i))].push_back(std::int32_t(i));

  VectorX<Scalar> reward = VectorX<Scalar>::Zero(m);
  SparseRowsBuilder<Scalar> out(m);
  RowAccumulator<Scalar> acc(m);
  for (Index x = 0; x < m; ++x) {
    const Scalar d = Scalar(1) / Scalar(members[std::size_t(x)].size());
    for (auto i : members[std::size_t(x)]) {
      reward[x] += d * a.reward()[i];
      a.row(i).for_each([&](Index j, Scalar p) { acc.add(agg(j), d * p); });
    }
    acc.flush(out);
  }
  return MatrixModel<Scalar>(std::move(reward), std::move(out).finish());
}

/// Compresses every action; the aggregate MDP keeps gamma and maps the sink.
template <typename Scalar>
Mdp<Scalar> compress_mdp(const Mdp<Scalar>& mdp, const Aggregation& agg) {
  std::vector<MatrixModel<Scalar>> acts;
  for (const auto& a : mdp.actions()) acts.push_back(compress_action(a, agg));
  std::optional<Index> sink;
  if (mdp.sink()) sink = agg(*mdp.sink());
  return Mdp<Scalar>(mdp.gamma(), mdp.names(), std::move(acts), sink);
}

/// Option over aggregate states: greedy action index and binary termination.
struct OptionPolicy {
  std::vector<Index> mu;
  TerminationVector beta;
};

/// beta from the aggregate fixed point, mu greedy with respect to
/// B(beta, M) G over the compressed actions.
template <typename Scalar>
OptionPolicy extract_option(const MatrixModel<Scalar>& m_inf, const SubgoalSpec<Scalar>& g,
                            const std::vector<MatrixModel<Scalar>>& compressed) {
  const Index m = m_inf.size();
  if (g.G.size() != m) throw DimensionError("extract_option: subgoal size mismatch");
  if (compressed.empty()) throw std::invalid_argument("extract_option: no actions");
  for (const auto& a : compressed)
    if (a.size() != m) throw DimensionError("extract_option: action size mismatch");
  OptionPolicy opt;
  const VectorX<Scalar> predicted = model_times_goal(m_inf, g.G);
  opt.beta = terminate_beta_from(predicted, g.G);
  VectorX<Scalar> w(m);
  for (Index x = 0; x < m; ++x) w[x] = opt.beta[x] ? g.G[x] : predicted[x];
  opt.mu.assign(std::size_t(m), 0);
  for (Index x = 0; x < m; ++x) {
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < Index(compressed.size()); ++c) {
      const auto& A = compressed[std::size_t(c)];
      const Scalar v = A.reward()[x] + A.row(x).dot(w);
      if (v > best) {
        best = v;
        opt.mu[std::size_t(x)] = c;
      }
    }
  }
  return opt;
}

namespace detail {
inline void check_option(const OptionPolicy& opt, Index actions, const Aggregation& agg) {
  if (Index(opt.mu.size()) != agg.aggregate_size() || opt.beta.size() != agg.aggregate_size())
    throw DimensionError("option size differs from aggregate state count");
  for (auto a : opt.mu)
    if (a < 0 || a >= actions) throw std::invalid_argument("option policy names an unknown action");
}
}  // namespace detail

/// One-step model M': identity rows where the option terminates, rows of the
/// chosen action elsewhere.
template <typename Scalar>
MatrixModel<Scalar> upscale_one_step(const OptionPolicy& opt, const Mdp<Scalar>& mdp, const Aggregation& agg) {
  if (mdp.size() != agg.original_size()) throw DimensionError("upscale_one_step: aggregation/MDP size mismatch");
  detail::check_option(opt, mdp.action_count(), agg);
  const Index n = mdp.size();
  SparseRowsBuilder<Scalar> b(n);
  VectorX<Scalar> reward(n);
  for (Index i = 0; i < n; ++i) {
    const Index x = agg(i);
    if (opt.beta[x]) {
      reward[i] = Scalar(0);
      b.push_unit(i);
    } else {
      const auto& A = mdp.action(opt.mu[std::size_t(x)]);
      reward[i] = A.reward()[i];
      b.push_row(A.row(i));
    }
  }
  return unchecked_model(std::move(reward), std::move(b).finish());
}

/// M'': rows of the long-run model M'^inf where the option continues, and one
/// step of the option policy where it terminates, so no identity rows remain.
template <typename Scalar>
MatrixModel<Scalar> finalize_macro(const MatrixModel<Scalar>& m_prime, const OptionPolicy& opt,
                                   const Mdp<Scalar>& mdp, const Aggregation& agg, Scalar tol = Scalar(1e-12),
                                   int cap = 64) {
  if (m_prime.size() != mdp.size()) throw DimensionError("finalize_macro: size mismatch");
  detail::check_option(opt, mdp.action_count(), agg);
  const MatrixModel<Scalar> limit = model_power_limit(m_prime, tol, cap);
  const Index n = mdp.size();
  SparseRowsBuilder<Scalar> b(n);
  VectorX<Scalar> reward(n);
  for (Index i = 0; i < n; ++i) {
    const Index x = agg(i);
    const auto& src = opt.beta[x] ? mdp.action(opt.mu[std::size_t(x)]) : limit;
    reward[i] = src.reward()[i];
    b.push_row(src.row(i));
  }
  return unchecked_model(std::move(reward), std::move(b).finish());
}

/// V(i) = V_aggregate(phi(i)).
template <typename Scalar>
ValueFunction<Scalar> upscale_value(const ValueFunction<Scalar>& v_agg, const Aggregation& agg) {
  if (v_agg.size() != agg.aggregate_size()) throw DimensionError("upscale_value: size mismatch");
  VectorX<Scalar> v(agg.original_size());
  for (Index i = 0; i < agg.original_size(); ++i) v[i] = v_agg[agg(i)];
  return ValueFunction<Scalar>(std::move(v));
}

/// Default subgoal reward at target states: 2 max|R| / (1 - gamma) when
/// discounted, 2 max|R| n for undiscounted problems with a sink.
template <typename Scalar>
Scalar default_subgoal_magnitude(const Mdp<Scalar>& mdp) {
  const Scalar r = std::max(mdp.max_abs_reward(), Scalar(1));
  if (mdp.gamma() < Scalar(1)) return Scalar(2) * r / (Scalar(1) - mdp.gamma());
  return Scalar(2) * r * Scalar(mdp.size());
}

/// Subgoal with `value` on the listed states and 0 elsewhere.
template <typename Scalar>
SubgoalSpec<Scalar> make_subgoal(std::string name, Index n, const std::vector<Index>& targets, Scalar value) {
  VectorX<Scalar> g = VectorX<Scalar>::Zero(n);
  for (auto t : targets) {
    if (t < 0 || t >= n) throw DimensionError("make_subgoal: target out of range");
    g[t] = value;
  }
  return {std::move(name), ValueFunction<Scalar>(std::move(g))};
}

struct MacroOptions {
  SolveOptions solve;
  double power_tol = 1e-12;
  int power_cap = 64;
};

/// Result of building macros for several subgoals at one aggregation.
template <typename Scalar>
struct MacroSet {
  std::vector<MatrixModel<Scalar>> macros;
  std::vector<OptionPolicy> options;
  SolveReport aggregate_report;
};

/// Upscales already-solved aggregate subgoal models into macros.
template <typename Scalar>
MacroSet<Scalar> upscale_solutions(const Mdp<Scalar>& mdp, const Aggregation& agg, const Mdp<Scalar>& compressed,
                                   const std::vector<SubgoalSpec<Scalar>>& goals,
                                   const std::vector<MatrixModel<Scalar>>& solved, const MacroOptions& o) {
  MacroSet<Scalar> out;
  for (std::size_t q = 0; q < goals.size(); ++q) {
    OptionPolicy opt = extract_option(solved[q], goals[q], compressed.actions());
    const MatrixModel<Scalar> one = upscale_one_step(opt, mdp, agg);
    out.macros.push_back(finalize_macro(one, opt, mdp, agg, Scalar(o.power_tol), o.power_cap));
    out.options.push_back(std::move(opt));
  }
  return out;
}

/// Full pipeline for one aggregate subgoal: compress, solve in the aggregate
/// space, extract the option, upscale and finalize.
template <typename Scalar>
MatrixModel<Scalar> build_macro(const Mdp<Scalar>& mdp, const Aggregation& agg, const SubgoalSpec<Scalar>& g,
                                const MacroOptions& o = {}, SolveReport* report = nullptr) {
  if (g.G.size() != agg.aggregate_size()) throw DimensionError("build_macro: subgoal must be aggregate-sized");
  const Mdp<Scalar> small = compress_mdp(mdp, agg);
  auto [solved, rep] = subgoal_vi(small, g, InitiationSets{}, o.solve);
  if (report) *report = rep;
  auto set = upscale_solutions(mdp, agg, small, {g}, {solved}, o);
  return std::move(set.macros.front());
}

/// Joint version: all goals solved together in the aggregate space.
template <typename Scalar>
MacroSet<Scalar> build_macros(const Mdp<Scalar>& mdp, const Aggregation& agg,
                              const std::vector<SubgoalSpec<Scalar>>& goals, const MacroOptions& o = {}) {
  for (const auto& g : goals)
    if (g.G.size() != agg.aggregate_size()) throw DimensionError("build_macros: subgoal must be aggregate-sized");
  const Mdp<Scalar> small = compress_mdp(mdp, agg);
  auto [solved, rep] = multi_subgoal_vi(small, goals, o.solve);
  auto set = upscale_solutions(mdp, agg, small, goals, solved, o);
  set.aggregate_report = rep;
  return set;
}

/// States where the option does not terminate, i.e. where M' differs from
/// the identity row. Used as the macro's initiation set after truncated
/// training.
inline std::vector<std::uint8_t> option_initiation_mask(const OptionPolicy& opt, const Aggregation& agg) {
  std::vector<std::uint8_t> mask(std::size_t(agg.original_size()), 0);
  for (Index i = 0; i < agg.original_size(); ++i) mask[std::size_t(i)] = opt.beta[agg(i)] ? 0 : 1;
  return mask;
}

}  // namespace hvi
