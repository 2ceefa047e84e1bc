#include <random>

#include "hvi/domains.hpp"

namespace hvi {

MdpD random_mdp(const RandomMdpParams& p) {
  if (p.states < 1 || p.actions < 1 || p.max_successors < 1)
    throw std::invalid_argument("random_mdp: states, actions and successors must be positive");
  if (!(p.gamma > 0 && p.gamma < 1)) throw std::invalid_argument("random_mdp: gamma must lie in (0, 1)");
  std::mt19937_64 rng(p.seed);
  // Raw draws only; library distributions differ across standard libraries.
  auto unit = [&] { return double(rng() >> 11) * 0x1.0p-53; };
  const Index n = p.states;
  const Index fan = std::min<Index>(n, p.max_successors);
  std::vector<ModelD> models;
  std::vector<std::string> names;
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (int a = 0; a < p.actions; ++a) {
    VectorX<double> reward(n);
    std::vector<Eigen::Triplet<double, std::int64_t>> t;
    for (Index i = 0; i < n; ++i) {
      reward[i] = 2 * unit() - 1;
      const Index k = 1 + Index(rng() % std::uint64_t(fan));
      for (Index j = 0; j < n; ++j) pool[std::size_t(j)] = j;
      std::vector<double> w(static_cast<std::size_t>(k));
      double total = 0;
      for (Index s = 0; s < k; ++s) {
        const Index pick = s + Index(rng() % std::uint64_t(n - s));
        std::swap(pool[std::size_t(s)], pool[std::size_t(pick)]);
        w[std::size_t(s)] = 0.05 + unit();
        total += w[std::size_t(s)];
      }
      for (Index s = 0; s < k; ++s) t.emplace_back(i, pool[std::size_t(s)], w[std::size_t(s)] / total);
    }
    RowMajorSparse<double> m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    models.push_back(make_model<double>(reward, m, p.gamma));
    names.push_back("a" + std::to_string(a));
  }
  return MdpD(p.gamma, std::move(names), std::move(models));
}

}  // namespace hvi
