#pragma once

// Block matrix models [[1, 0], [R, P]] over n states, value functions with an
// implicit leading 1, and the MDP container. Discount is folded into P when a
// model is made, so every P is sub-stochastic.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hvi/parallel.hpp"
#include "hvi/sparse_rows.hpp"

namespace hvi {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kRowSumTolerance = 1e-12;

/// Value function over n states. Conceptually [1, V(0), ..., V(n-1)]; the
/// leading 1 is implicit.
template <typename Scalar>
class ValueFunction {
 public:
  ValueFunction() = default;
  explicit ValueFunction(Index n) : values_(VectorX<Scalar>::Zero(n)) {}
  explicit ValueFunction(VectorX<Scalar> values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw ModelError("ValueFunction: non-finite entry");
  }

  static ValueFunction constant(Index n, Scalar c) { return ValueFunction(VectorX<Scalar>::Constant(n, c)); }

  Index size() const { return values_.size(); }
  const VectorX<Scalar>& values() const { return values_; }
  Scalar operator[](Index i) const { return values_[i]; }
  Scalar operator()(Index i) const { return values_[i]; }

 private:
  VectorX<Scalar> values_;
};

/// Block model [[1, 0], [R, P]]. R is the expected total discounted reward
/// from each start state, P the discounted termination weights.
template <typename Scalar>
class MatrixModel {
 public:
  MatrixModel() = default;

  /// Takes already-discounted transitions. Checks the model invariants.
  MatrixModel(VectorX<Scalar> reward, SparseRows<Scalar> trans)
      : reward_(std::move(reward)), trans_(std::move(trans)) {
    if (trans_.size() != reward_.size() || trans_.rows() != reward_.size())
      throw DimensionError("MatrixModel: reward and transition sizes differ");
    if (!reward_.allFinite()) throw ModelError("MatrixModel: non-finite reward");
    for (Index i = 0; i < size(); ++i) {
      Scalar s(0);
      trans_.row(i).for_each([&](Index, Scalar p) {
        if (!(p >= Scalar(0))) throw ModelError("MatrixModel: negative transition weight");
        s += p;
      });
      if (s > Scalar(1) + Scalar(kRowSumTolerance))
        throw ModelError("MatrixModel: row " + std::to_string(i) + " sums above 1");
    }
  }

  static MatrixModel identity(Index n) {
    MatrixModel m;
    m.reward_ = VectorX<Scalar>::Zero(n);
    m.trans_ = SparseRows<Scalar>::identity(n);
    return m;
  }

  Index size() const { return reward_.size(); }
  const VectorX<Scalar>& reward() const { return reward_; }
  const SparseRows<Scalar>& trans() const { return trans_; }

  /// Row i of the block matrix, restricted to the state columns.
  RowView<Scalar> row(Index i) const { return trans_.row(i); }

  /// Whether block row i+1 equals the identity row (zero reward, unit P).
  bool is_identity_row(Index i) const { return reward_[i] == Scalar(0) && trans_.row(i).is_unit(i); }

 private:
  template <typename S>
  friend MatrixModel<S> unchecked_model(VectorX<S>, SparseRows<S>);

  VectorX<Scalar> reward_;
  SparseRows<Scalar> trans_;
};

/// Builds a model without re-validating; for internal products whose inputs
/// already satisfy the invariants.
template <typename Scalar>
MatrixModel<Scalar> unchecked_model(VectorX<Scalar> reward, SparseRows<Scalar> trans) {
  MatrixModel<Scalar> m;
  m.reward_ = std::move(reward);
  m.trans_ = std::move(trans);
  return m;
}

/// Model of a primitive action from raw transition probabilities. The
/// discount is folded into P; raw probabilities are not kept.
template <typename Scalar>
MatrixModel<Scalar> make_model(const VectorX<Scalar>& reward, const RowMajorSparse<Scalar>& trans, Scalar gamma) {
  if (trans.rows() != trans.cols() || trans.rows() != reward.size())
    throw DimensionError("make_model: transition matrix must be n x n with n = reward size");
  if (!(gamma > Scalar(0) && gamma <= Scalar(1))) throw ModelError("make_model: gamma must lie in (0, 1]");
  RowMajorSparse<Scalar> raw = trans;
  raw.makeCompressed();
  for (Index i = 0; i < raw.outerSize(); ++i) {
    Scalar s(0);
    for (typename RowMajorSparse<Scalar>::InnerIterator it(raw, i); it; ++it) {
      if (it.value() < Scalar(0)) throw ModelError("make_model: negative probability");
      s += it.value();
    }
    if (s > Scalar(1) + Scalar(kRowSumTolerance))
      throw ModelError("make_model: row " + std::to_string(i) + " sums above 1");
  }
  RowMajorSparse<Scalar> scaled = raw * gamma;
  return MatrixModel<Scalar>(reward, SparseRows<Scalar>::from_eigen(scaled));
}

namespace detail {

/// Row i of the block product first * second: reward R1(i) + P1(i,:) R2 and
/// transitions P1(i,:) P2.
template <typename Scalar>
Scalar compose_row(const MatrixModel<Scalar>& first, Index i, const MatrixModel<Scalar>& second,
                   RowAccumulator<Scalar>& acc) {
  Scalar r = first.reward()[i];
  first.row(i).for_each([&](Index j, Scalar p) {
    r += p * second.reward()[j];
    acc.add_row(second.row(j), p);
  });
  return r;
}

/// Builds an n-row model whose row i is produced by row_fn(i, acc) (which
/// returns the reward and fills the accumulator). Rows are computed in
/// parallel chunks and concatenated in order.
template <typename Scalar, typename RowFn>
MatrixModel<Scalar> build_rows(Index n, RowFn&& row_fn) {
  VectorX<Scalar> reward(n);
  const int chunks = chunk_count(n);
  std::vector<SparseRows<Scalar>> parts(static_cast<std::size_t>(chunks));
  parallel_chunks(n, [&](int c, Index b, Index e) {
    SparseRowsBuilder<Scalar> out(n);
    RowAccumulator<Scalar> acc(n);
    for (Index i = b; i < e; ++i) {
      reward[i] = row_fn(i, acc);
      acc.flush(out);
    }
    parts[std::size_t(c)] = std::move(out).finish();
  });
  if (chunks == 1) return unchecked_model(std::move(reward), std::move(parts[0]));
  SparseRowsBuilder<Scalar> all(n);
  for (auto& p : parts) all.append(p);
  return unchecked_model(std::move(reward), std::move(all).finish());
}

template <typename Scalar>
void check_same_size(Index a, Index b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": size mismatch");
}

}  // namespace detail

/// Block product: executing `first` then `second`.
template <typename Scalar>
MatrixModel<Scalar> compose(const MatrixModel<Scalar>& first, const MatrixModel<Scalar>& second) {
  detail::check_same_size<Scalar>(first.size(), second.size(), "compose");
  return detail::build_rows<Scalar>(first.size(), [&](Index i, RowAccumulator<Scalar>& acc) {
    return detail::compose_row(first, i, second, acc);
  });
}

/// M V: execute the model, then evaluate with V.
template <typename Scalar>
ValueFunction<Scalar> apply(const MatrixModel<Scalar>& m, const ValueFunction<Scalar>& v) {
  detail::check_same_size<Scalar>(m.size(), v.size(), "apply");
  VectorX<Scalar> out(m.size());
  for (Index i = 0; i < m.size(); ++i) out[i] = m.reward()[i] + m.row(i).dot(v.values());
  return ValueFunction<Scalar>(std::move(out));
}

/// M [1, 0, ..., 0]^T, the total reward part of the model.
template <typename Scalar>
ValueFunction<Scalar> value_of_model(const MatrixModel<Scalar>& m) {
  return ValueFunction<Scalar>(m.reward());
}

/// Max-abs difference over both reward and transition parts.
template <typename Scalar>
Scalar max_abs_diff(const MatrixModel<Scalar>& a, const MatrixModel<Scalar>& b) {
  detail::check_same_size<Scalar>(a.size(), b.size(), "max_abs_diff");
  Scalar d = (a.reward() - b.reward()).cwiseAbs().maxCoeff();
  std::vector<Scalar> dense(std::size_t(a.size()), Scalar(0));
  for (Index i = 0; i < a.size(); ++i) {
    a.row(i).for_each([&](Index j, Scalar p) { dense[j] += p; });
    b.row(i).for_each([&](Index j, Scalar p) { dense[j] -= p; });
    auto sweep = [&](Index j, Scalar) {
      d = std::max(d, std::abs(dense[j]));
      dense[j] = Scalar(0);
    };
    a.row(i).for_each(sweep);
    b.row(i).for_each(sweep);
  }
  return d;
}

/// Limit of M^k by repeated squaring. Stops once successive squares differ
/// by less than tol; throws ConvergenceError after `cap` squarings.
template <typename Scalar>
MatrixModel<Scalar> model_power_limit(const MatrixModel<Scalar>& m, Scalar tol, int cap) {
  if (!(tol > Scalar(0)) || cap < 1) throw std::invalid_argument("model_power_limit: need tol > 0 and cap >= 1");
  MatrixModel<Scalar> cur = m;
  for (int k = 0; k < cap; ++k) {
    MatrixModel<Scalar> next = compose(cur, cur);
    const Scalar d = max_abs_diff(cur, next);
    cur = std::move(next);
    if (d < tol) return cur;
  }
  throw ConvergenceError("model_power_limit: no convergence after " + std::to_string(cap) + " squarings");
}

/// A discounted MDP: ordered named action models over a common state set.
template <typename Scalar>
class Mdp {
 public:
  Mdp() = default;
  Mdp(Scalar gamma, std::vector<std::string> names, std::vector<MatrixModel<Scalar>> actions,
      std::optional<Index> sink = std::nullopt)
      : gamma_(gamma), names_(std::move(names)), actions_(std::move(actions)), sink_(sink) {
    validate();
  }

  Index size() const { return actions_.empty() ? 0 : actions_.front().size(); }
  Scalar gamma() const { return gamma_; }
  std::optional<Index> sink() const { return sink_; }
  Index action_count() const { return Index(actions_.size()); }
  const std::vector<MatrixModel<Scalar>>& actions() const { return actions_; }
  const MatrixModel<Scalar>& action(Index a) const { return actions_[std::size_t(a)]; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(Index a) const { return names_[std::size_t(a)]; }

  /// Copy with extra (already valid) models appended to the action list.
  Mdp with_actions(const std::vector<MatrixModel<Scalar>>& extra, const std::vector<std::string>& extra_names) const {
    Mdp out = *this;
    out.actions_.insert(out.actions_.end(), extra.begin(), extra.end());
    out.names_.insert(out.names_.end(), extra_names.begin(), extra_names.end());
    out.validate();
    return out;
  }

  Scalar max_abs_reward() const {
    Scalar r(0);
    for (const auto& a : actions_)
      if (a.size() > 0) r = std::max(r, a.reward().cwiseAbs().maxCoeff());
    return r;
  }

 private:
  void validate() const {
    if (!(gamma_ > Scalar(0) && gamma_ <= Scalar(1))) throw ModelError("Mdp: gamma must lie in (0, 1]");
    if (names_.size() != actions_.size()) throw DimensionError("Mdp: one name per action required");
    if (actions_.empty()) throw ModelError("Mdp: at least one action required");
    const Index n = size();
    for (const auto& a : actions_)
      if (a.size() != n) throw DimensionError("Mdp: action models differ in size");
    if (sink_) {
      if (*sink_ < 0 || *sink_ >= n) throw ModelError("Mdp: sink index out of range");
    }
    if (gamma_ == Scalar(1)) {
      if (!sink_) throw ModelError("Mdp: gamma = 1 requires a sink state");
      for (const auto& a : actions_)
        if (!a.is_identity_row(*sink_)) throw ModelError("Mdp: sink must be absorbing with zero reward");
    }
  }

  Scalar gamma_ = Scalar(1);
  std::vector<std::string> names_;
  std::vector<MatrixModel<Scalar>> actions_;
  std::optional<Index> sink_;
};

}  // namespace hvi
