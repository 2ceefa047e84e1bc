#pragma once

// Linear-feature model projection and the divergence diagnostic: a
// least-squares projected model [[1,0],[q,F]] can have spectral radius above
// one even when the table-lookup model is a contraction.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hvi/aggregation.hpp"
#include "hvi/model.hpp"

namespace hvi {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Block model [[1, 0], [q, F]] over k features. No stochasticity constraint.
template <typename Scalar>
struct LinearModel {
  VectorX<Scalar> q;
  MatrixX<Scalar> F;

  Index features() const { return q.size(); }
};

struct SingularFeaturesError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
MatrixX<Scalar> dense_transitions(const MatrixModel<Scalar>& m) {
  MatrixX<Scalar> p = MatrixX<Scalar>::Zero(m.size(), m.size());
  for (Index i = 0; i < m.size(); ++i) m.row(i).for_each([&](Index j, Scalar v) { p(i, j) = v; });
  return p;
}

/// Pi = (Phi^T Xi Phi)^-1 Phi^T Xi; F = Pi P Phi, q = Pi R.
template <typename Scalar>
LinearModel<Scalar> project_model(const MatrixModel<Scalar>& m, const MatrixX<Scalar>& features,
                                  const VectorX<Scalar>& xi) {
  const Index n = m.size();
  if (features.rows() != n || xi.size() != n) throw DimensionError("project_model: size mismatch");
  if ((xi.array() < Scalar(0)).any() || std::abs(xi.sum() - Scalar(1)) > Scalar(1e-9))
    throw std::invalid_argument("project_model: xi must be a distribution");
  const MatrixX<Scalar> weighted = features.transpose() * xi.asDiagonal();
  const MatrixX<Scalar> normal = weighted * features;
  Eigen::FullPivLU<MatrixX<Scalar>> lu(normal);
  if (!lu.isInvertible()) throw SingularFeaturesError("project_model: Phi^T Xi Phi is singular");
  const MatrixX<Scalar> proj = lu.solve(weighted);
  LinearModel<Scalar> out;
  out.F = proj * dense_transitions(m) * features;
  out.q = proj * m.reward();
  return out;
}

template <typename Scalar>
LinearModel<Scalar> compose(const LinearModel<Scalar>& first, const LinearModel<Scalar>& second) {
  if (first.features() != second.features()) throw DimensionError("compose: feature count mismatch");
  return {first.q + first.F * second.q, first.F * second.F};
}

/// Largest |eigenvalue|. Power iteration first; when the iterate does not
/// settle (complex or opposite-sign dominant pair) falls back to a full
/// eigenvalue decomposition.
template <typename Scalar>
Scalar spectral_radius(const MatrixX<Scalar>& a, Scalar tol = Scalar(1e-10), int max_iter = 10000) {
  if (a.rows() != a.cols()) throw DimensionError("spectral_radius: matrix must be square");
  const Index k = a.rows();
  if (k == 0) return Scalar(0);
  VectorX<Scalar> x = VectorX<Scalar>::Ones(k) / std::sqrt(Scalar(k));
  // Tilt the start so it is unlikely to be orthogonal to the dominant vector.
  for (Index i = 0; i < k; ++i) x[i] += Scalar(i + 1) * Scalar(1e-3);
  x.normalize();
  Scalar lambda(0);
  for (int it = 0; it < max_iter; ++it) {
    VectorX<Scalar> y = a * x;
    const Scalar norm = y.norm();
    if (norm == Scalar(0)) break;
    const Scalar next = norm;
    y /= norm;
    const Scalar step = std::min((y - x).norm(), (y + x).norm());
    lambda = next;
    x = y;
    if (step < tol) {
      // |A x| = rho for a converged dominant eigenvector (sign flips allowed).
      return lambda;
    }
  }
  Eigen::EigenSolver<MatrixX<Scalar>> es(a, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("spectral_radius: eigenvalue solver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Stationary distribution of the chain P / gamma (rows renormalized) by
/// power iteration on its transpose, started from uniform.
template <typename Scalar>
VectorX<Scalar> stationary_distribution(const MatrixModel<Scalar>& m, Scalar tol = Scalar(1e-13),
                                        int max_iter = 100000) {
  MatrixX<Scalar> p = dense_transitions(m);
  for (Index i = 0; i < p.rows(); ++i) {
    const Scalar s = p.row(i).sum();
    if (s > Scalar(0)) p.row(i) /= s;
  }
  VectorX<Scalar> x = VectorX<Scalar>::Constant(p.rows(), Scalar(1) / Scalar(p.rows()));
  for (int it = 0; it < max_iter; ++it) {
    VectorX<Scalar> y = p.transpose() * x;
    y /= y.sum();
    // Average with the previous iterate so periodic chains also settle.
    y = Scalar(0.5) * (y + x);
    const Scalar d = (y - x).cwiseAbs().maxCoeff();
    x = y;
    if (d < tol) return x;
  }
  throw ConvergenceError("stationary_distribution: no convergence");
}

/// The four-state, two-feature example on which projection diverges.
template <typename Scalar>
MatrixModel<Scalar> counterexample_model(Scalar gamma) {
  RowMajorSparse<Scalar> p(4, 4);
  p.insert(0, 0) = 1;
  p.insert(1, 0) = 1;
  p.insert(2, 1) = 1;
  p.insert(3, 2) = 1;
  return make_model<Scalar>(VectorX<Scalar>::Ones(4), p, gamma);
}

template <typename Scalar>
MatrixX<Scalar> counterexample_features() {
  MatrixX<Scalar> phi(4, 2);
  phi << 1, 1, 1, 0, 0, 1, 0, 0;
  return phi;
}

struct NormStep {
  int step;
  double reward_norm;
  double trans_norm;
};

struct DivergenceReport {
  double gamma = 0;
  double rho = 0;
  bool diverges = false;
  std::vector<NormStep> projected;
  std::vector<NormStep> aggregated;
  double aggregated_reward_bound = 0;
};

/// Divergence iff the combined norm exceeds 1e6 and grew at each of the last
/// ten recorded steps.
inline bool trajectory_diverges(const std::vector<NormStep>& t) {
  if (t.size() < 11) return false;
  auto total = [](const NormStep& s) { return std::max(s.reward_norm, s.trans_norm); };
  if (!(total(t.back()) > 1e6)) return false;
  for (std::size_t k = t.size() - 10; k < t.size(); ++k)
    if (!(total(t[k]) > total(t[k - 1]))) return false;
  return true;
}

/// Self-composes the projected counterexample `steps` times and, for
/// comparison, the hard-aggregation compression of the same action.
DivergenceReport divergence_demo(double gamma, int steps);

}  // namespace hvi
