#include "hvi/aggregation.hpp"

namespace hvi {

Aggregation build_hard_aggregation(Index n, const std::vector<std::int32_t>& phi_map, std::optional<Index> sink) {
  if (Index(phi_map.size()) != n) throw DimensionError("build_hard_aggregation: map must cover every state");
  std::int32_t m = 0;
  for (auto x : phi_map) {
    if (x < 0) throw std::invalid_argument("build_hard_aggregation: negative aggregate index");
    m = std::max(m, x + 1);
  }
  Aggregation agg;
  agg.map_ = phi_map;
  agg.count_.assign(std::size_t(m), 0);
  for (auto x : phi_map) ++agg.count_[std::size_t(x)];
  for (std::int32_t x = 0; x < m; ++x)
    if (agg.count_[std::size_t(x)] == 0)
      throw std::invalid_argument("build_hard_aggregation: aggregate state " + std::to_string(x) +
                                  " has an empty pre-image");
  if (sink) {
    if (*sink < 0 || *sink >= n) throw std::invalid_argument("build_hard_aggregation: sink out of range");
    const auto xs = phi_map[std::size_t(*sink)];
    if (agg.count_[std::size_t(xs)] != 1)
      throw std::invalid_argument("build_hard_aggregation: the sink must map to an aggregate state of its own");
    agg.sink_ = xs;
  }
  return agg;
}

Aggregation identity_aggregation(Index n, std::optional<Index> sink) {
  std::vector<std::int32_t> map(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) map[std::size_t(i)] = std::int32_t(i);
  return build_hard_aggregation(n, map, sink);
}

}  // namespace hvi
