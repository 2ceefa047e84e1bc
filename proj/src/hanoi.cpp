#include <sstream>

#include "hvi/domains.hpp"

namespace hvi {

namespace {

Index pow3(int k) {
  Index p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

/// Smallest disk on each peg (0-based pegs), or -1 when empty.
std::array<int, 3> tops(const std::vector<int>& pegs) {
  std::array<int, 3> t{-1, -1, -1};
  for (int d = int(pegs.size()) - 1; d >= 0; --d) t[std::size_t(pegs[std::size_t(d)] - 1)] = d;
  return t;
}

/// Applies action a (0: smallest disk one peg forward, 1: smallest disk one
/// peg back, 2: the move between the two other pegs). Returns false when the
/// move is illegal.
bool hanoi_move(std::vector<int>& pegs, int a) {
  const int small = pegs[0] - 1;
  if (a == 0 || a == 1) {
    pegs[0] = (small + (a == 0 ? 1 : 2)) % 3 + 1;
    return true;
  }
  const auto t = tops(pegs);
  const int p = (small + 1) % 3, q = (small + 2) % 3;
  const int tp = t[std::size_t(p)], tq = t[std::size_t(q)];
  if (tp < 0 && tq < 0) return false;
  if (tq < 0 || (tp >= 0 && tp < tq))
    pegs[std::size_t(tp)] = q + 1;
  else
    pegs[std::size_t(tq)] = p + 1;
  return true;
}

}  // namespace

Index HanoiCodec::states() const { return pow3(disks_); }

Index HanoiCodec::encode(const std::vector<int>& pegs) const {
  if (int(pegs.size()) != disks_) throw InvalidStateError("HanoiCodec: wrong tuple length");
  Index i = 0;
  for (int d = disks_ - 1; d >= 0; --d) {
    const int p = pegs[std::size_t(d)];
    if (p < 1 || p > 3) throw InvalidStateError("HanoiCodec: peg must be 1, 2 or 3");
    i = i * 3 + (p - 1);
  }
  return i;
}

std::vector<int> HanoiCodec::decode(Index i) const {
  if (i < 0 || i >= states()) throw InvalidStateError("HanoiCodec: index out of range");
  std::vector<int> pegs(static_cast<std::size_t>(disks_));
  for (int d = 0; d < disks_; ++d) {
    pegs[std::size_t(d)] = int(i % 3) + 1;
    i /= 3;
  }
  return pegs;
}

std::string HanoiCodec::describe(Index i) const {
  if (i == sink()) return "sink";
  std::ostringstream os;
  const auto pegs = decode(i);
  for (std::size_t d = 0; d < pegs.size(); ++d) os << (d ? ":" : "") << pegs[d];
  return os.str();
}

int hanoi_legal_moves(const std::vector<int>& pegs) {
  std::vector<int> copy = pegs;
  return 2 + (hanoi_move(copy, 2) ? 1 : 0);
}

HanoiDomain build_hanoi(const HanoiParams& p) {
  if (p.disks < 2) throw std::invalid_argument("build_hanoi: need at least 2 disks");
  if (p.p_stay < 0 || p.p_stay >= 1) throw std::invalid_argument("build_hanoi: p_stay must lie in [0, 1)");
  HanoiDomain d{.mdp = {}, .codec = HanoiCodec(p.disks), .levels = {}};
  const Index states = d.codec.states();
  const Index n = states + 1, sink = states;
  const Index goal = states - 1;  // every disk on peg 3

  const std::vector<std::string> names{"small-forward", "small-back", "other"};
  std::vector<ModelD> models;
  for (int a = 0; a < 3; ++a) {
    VectorX<double> reward = VectorX<double>::Zero(n);
    std::vector<Eigen::Triplet<double, std::int64_t>> t;
    for (Index i = 0; i < states; ++i) {
      if (i == goal) {
        t.emplace_back(i, sink, 1.0);
        continue;
      }
      std::vector<int> pegs = d.codec.decode(i);
      const Index next = hanoi_move(pegs, a) ? d.codec.encode(pegs) : i;
      reward[i] = -1.0;
      t.emplace_back(i, next, 1.0 - p.p_stay);
      if (p.p_stay > 0) t.emplace_back(i, i, p.p_stay);
    }
    t.emplace_back(sink, sink, 1.0);
    RowMajorSparse<double> m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    models.push_back(make_model<double>(reward, m, 1.0));
  }
  d.mdp = MdpD(1.0, names, std::move(models), sink);

  for (int k = 2; k < p.disks; ++k) {
    const Index m = pow3(k);
    std::vector<std::int32_t> map(static_cast<std::size_t>(n));
    for (Index i = 0; i < states; ++i) map[std::size_t(i)] = std::int32_t(i % m);
    map[std::size_t(sink)] = std::int32_t(m);
    HanoiLevel level{k, build_hard_aggregation(n, map, sink), {}};
    const double magnitude = 2.0 * d.mdp.max_abs_reward() * double(m + 1);
    for (int peg = 1; peg <= 3; ++peg) {
      const Index target = (peg - 1) * (m - 1) / 2;
      level.goals.push_back(make_subgoal<double>("stack" + std::to_string(k) + "-peg" + std::to_string(peg), m + 1,
                                                 {target}, magnitude));
    }
    d.levels.push_back(std::move(level));
  }
  return d;
}

}  // namespace hvi
