#pragma once

// Small hand-built MDPs shared by several tests.

#include <algorithm>

#include "hvi/model.hpp"

namespace fixture {

using namespace hvi;

/// States 0..k-1 on a line plus sink k. "right" at the last state enters the
/// sink for free; every other step costs 1.
inline Mdp<double> exit_corridor(Index k) {
  const Index n = k + 1;
  std::vector<MatrixModel<double>> acts;
  for (int dir : {-1, 1}) {
    RowMajorSparse<double> p(n, n);
    VectorX<double> r = VectorX<double>::Constant(n, -1.0);
    for (Index i = 0; i < k; ++i) p.insert(i, i == k - 1 && dir > 0 ? k : std::clamp<Index>(i + dir, 0, k - 1)) = 1;
    if (dir > 0) r[k - 1] = 0;
    r[k] = 0;
    p.insert(k, k) = 1;
    acts.push_back(make_model<double>(r, p, 1.0));
  }
  return Mdp<double>(1.0, {"left", "right"}, acts, k);
}

/// Discounted corridor of k states with walls at both ends (moving into a
/// wall stays put); every step costs 1.
inline Mdp<double> walled_corridor(Index k, double gamma) {
  std::vector<MatrixModel<double>> acts;
  for (int dir : {-1, 1}) {
    RowMajorSparse<double> p(k, k);
    for (Index i = 0; i < k; ++i) p.insert(i, std::clamp<Index>(i + dir, 0, k - 1)) = 1;
    acts.push_back(make_model<double>(VectorX<double>::Constant(k, -1.0), p, gamma));
  }
  return Mdp<double>(gamma, {"left", "right"}, acts);
}

}  // namespace fixture
