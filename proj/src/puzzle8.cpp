#include <algorithm>
#include <sstream>

#include "hvi/domains.hpp"

namespace hvi {

namespace {

constexpr Index kHalfPerms = 20160;  // 8! / 2

Index factorial(int k) {
  Index f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::array<int, 8> tiles_of(const Board& b, int& blank) {
  std::array<int, 8> t{};
  int k = 0;
  blank = -1;
  for (int c = 0; c < 9; ++c) {
    if (b[std::size_t(c)] == 0)
      blank = c;
    else if (k < 8)
      t[std::size_t(k++)] = b[std::size_t(c)];
  }
  return t;
}

Index lehmer_rank(const std::array<int, 8>& t) {
  Index rank = 0;
  for (int i = 0; i < 8; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < 8; ++j) smaller += t[std::size_t(j)] < t[std::size_t(i)];
    rank += smaller * factorial(7 - i);
  }
  return rank;
}

std::array<int, 8> lehmer_unrank(Index rank) {
  std::vector<int> pool{1, 2, 3, 4, 5, 6, 7, 8};
  std::array<int, 8> t{};
  for (int i = 0; i < 8; ++i) {
    const Index f = factorial(7 - i);
    const auto k = std::size_t(rank / f);
    rank %= f;
    t[std::size_t(i)] = pool[k];
    pool.erase(pool.begin() + std::ptrdiff_t(k));
  }
  return t;
}

bool even_sequence(const std::array<int, 8>& t) {
  int inv = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) inv += t[std::size_t(i)] > t[std::size_t(j)];
  return inv % 2 == 0;
}

/// Base-4 code of the labeled board: 0 blank, group + 1 for tiles.
std::int32_t label_code(const Board& b, const Puzzle8Params& p) {
  std::int32_t code = 0;
  for (int c = 0; c < 9; ++c) {
    const int tile = b[std::size_t(c)];
    code = code * 4 + (tile == 0 ? 0 : p.group[std::size_t(tile)] + 1);
  }
  return code;
}

}  // namespace

bool puzzle8_even(const Board& b) {
  int blank;
  return even_sequence(tiles_of(b, blank));
}

Index Puzzle8Codec::encode(const Board& b) const {
  std::array<bool, 9> seen{};
  for (int v : b) {
    if (v < 0 || v > 8 || seen[std::size_t(v)]) throw InvalidStateError("Puzzle8Codec: not a permutation of 0..8");
    seen[std::size_t(v)] = true;
  }
  int blank;
  const auto t = tiles_of(b, blank);
  if (!even_sequence(t)) throw InvalidStateError("Puzzle8Codec: board is not solvable");
  return Index(blank) * kHalfPerms + lehmer_rank(t) / 2;
}

Board Puzzle8Codec::decode(Index i) const {
  if (i < 0 || i >= kStates) throw InvalidStateError("Puzzle8Codec: index out of range");
  const int blank = int(i / kHalfPerms);
  auto t = lehmer_unrank(2 * (i % kHalfPerms));
  // Ranks 2k and 2k+1 differ by swapping the last two tiles, one of them even.
  if (!even_sequence(t)) std::swap(t[6], t[7]);
  Board b{};
  int k = 0;
  for (int c = 0; c < 9; ++c) b[std::size_t(c)] = c == blank ? 0 : t[std::size_t(k++)];
  return b;
}

std::string Puzzle8Codec::describe(Index i) const {
  if (i == sink()) return "sink";
  const Board b = decode(i);
  std::ostringstream os;
  for (int c = 0; c < 9; ++c) os << (c ? ":" : "") << b[std::size_t(c)];
  return os.str();
}

Puzzle8Domain build_puzzle8(const Puzzle8Params& p) {
  {
    std::array<int, 9> sorted = p.goal;
    std::sort(sorted.begin(), sorted.end());
    for (int v = 0; v < 9; ++v)
      if (sorted[std::size_t(v)] != v) throw std::invalid_argument("build_puzzle8: goal is not a permutation of 0..8");
    if (!puzzle8_even(p.goal)) throw std::invalid_argument("build_puzzle8: goal must have even tile parity");
    for (int t = 1; t <= 8; ++t)
      if (p.group[std::size_t(t)] < 0 || p.group[std::size_t(t)] > 2)
        throw std::invalid_argument("build_puzzle8: group labels must be 0, 1 or 2");
  }
  Puzzle8Domain d{.mdp = {}, .codec = {}, .params = p, .labeled = {}, .subgoal = {}};
  const Index states = d.codec.states();
  const Index n = states + 1, sink = states;
  const Index goal = d.codec.encode(p.goal);

  // Blank moves up, down, left, right.
  static constexpr std::array<std::pair<int, int>, 4> moves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  const std::vector<std::string> names{"up", "down", "left", "right"};
  std::vector<std::vector<std::int64_t>> next(4, std::vector<std::int64_t>(std::size_t(n)));
  std::vector<std::int32_t> codes(static_cast<std::size_t>(states));
  parallel_chunks(states, [&](int, Index b, Index e) {
    for (Index i = b; i < e; ++i) {
      const Board board = d.codec.decode(i);
      codes[std::size_t(i)] = label_code(board, p);
      int blank = 0;
      while (board[std::size_t(blank)] != 0) ++blank;
      const int r = blank / 3, c = blank % 3;
      for (std::size_t a = 0; a < 4; ++a) {
        const int nr = r + moves[a].first, nc = c + moves[a].second;
        if (i == goal) {
          next[a][std::size_t(i)] = sink;
        } else if (nr < 0 || nr > 2 || nc < 0 || nc > 2) {
          next[a][std::size_t(i)] = i;
        } else {
          Board moved = board;
          std::swap(moved[std::size_t(blank)], moved[std::size_t(nr * 3 + nc)]);
          next[a][std::size_t(i)] = d.codec.encode(moved);
        }
      }
    }
  });

  std::vector<ModelD> models;
  for (std::size_t a = 0; a < 4; ++a) {
    VectorX<double> reward = VectorX<double>::Constant(n, -1.0);
    reward[goal] = 0.0;
    reward[sink] = 0.0;
    SparseRowsBuilder<double> rows(n);
    rows.reserve(n, n);
    for (Index i = 0; i < states; ++i) rows.push_unit(next[a][std::size_t(i)]);
    rows.push_unit(sink);
    models.push_back(MatrixModel<double>(std::move(reward), std::move(rows).finish()));
  }
  d.mdp = MdpD(1.0, names, std::move(models), sink);

  std::vector<std::int32_t> distinct = codes;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::int32_t> map(static_cast<std::size_t>(n));
  for (Index i = 0; i < states; ++i)
    map[std::size_t(i)] = std::int32_t(std::lower_bound(distinct.begin(), distinct.end(), codes[std::size_t(i)]) -
                                       distinct.begin());
  map[std::size_t(sink)] = std::int32_t(distinct.size());
  d.labeled = build_hard_aggregation(n, map, sink);

  const Index m = d.labeled.aggregate_size();
  d.subgoal = make_subgoal<double>("labeled-goal", m, {Index(map[std::size_t(goal)])},
                                   2.0 * d.mdp.max_abs_reward() * double(m));
  return d;
}

}  // namespace hvi
