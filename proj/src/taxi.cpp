#include <sstream>

#include "hvi/domains.hpp"

namespace hvi {

namespace {

constexpr double kStep = -1.0;
constexpr double kDelivery = 20.0;
constexpr double kIllegal = -10.0;
constexpr double kOutOfFuel = -20.0;

constexpr int kInTaxi = 4;

struct Outcome {
  Index next;
  double prob;
};

/// Collects raw (pre-discount) rows and expected rewards for one action.
class ActionBuilder {
 public:
  explicit ActionBuilder(Index n) : reward_(VectorX<double>::Zero(n)), n_(n) {}

  void set(Index i, double reward, std::initializer_list<Outcome> outs) {
    reward_[i] = reward;
    for (const auto& o : outs)
      if (o.prob > 0) t_.emplace_back(i, o.next, o.prob);
  }

  ModelD finish(double gamma) const {
    RowMajorSparse<double> p(n_, n_);
    p.setFromTriplets(t_.begin(), t_.end());
    return make_model<double>(reward_, p, gamma);
  }

 private:
  VectorX<double> reward_;
  Index n_;
  std::vector<Eigen::Triplet<double, std::int64_t>> t_;
};

}  // namespace

bool taxi_blocked(Cell from, int dr, int dc) {
  const int r = from.row + dr, c = from.col + dc;
  if (r < 0 || r >= TaxiCodec::kGrid || c < 0 || c >= TaxiCodec::kGrid) return true;
  if (dc == 0) return false;
  // Vertical wall segments, as (row, column on the left of the wall).
  static constexpr std::array<std::pair<int, int>, 6> walls{{{0, 1}, {1, 1}, {3, 0}, {4, 0}, {3, 2}, {4, 2}}};
  const int left = std::min(from.col, c);
  for (const auto& [wr, wc] : walls)
    if (wr == from.row && wc == left) return true;
  return false;
}

Index TaxiCodec::encode(const TaxiState& s) const {
  if (s.row < 0 || s.row >= kGrid || s.col < 0 || s.col >= kGrid || s.passenger < 0 || s.passenger >= kPassenger ||
      s.destination < 0 || s.destination >= kDestination || s.fuel < 0 || s.fuel >= fuel_levels_)
    throw InvalidStateError("TaxiCodec: state out of range");
  return (((Index(s.row) * kGrid + s.col) * kPassenger + s.passenger) * kDestination + s.destination) *
             fuel_levels_ +
         s.fuel;
}

TaxiState TaxiCodec::decode(Index i) const {
  if (i < 0 || i >= states()) throw InvalidStateError("TaxiCodec: index out of range");
  TaxiState s;
  s.fuel = int(i % fuel_levels_);
  i /= fuel_levels_;
  s.destination = int(i % kDestination);
  i /= kDestination;
  s.passenger = int(i % kPassenger);
  i /= kPassenger;
  s.col = int(i % kGrid);
  s.row = int(i / kGrid);
  return s;
}

std::string TaxiCodec::describe(Index i) const {
  if (i == sink()) return "sink";
  const TaxiState s = decode(i);
  std::ostringstream os;
  os << s.row << ':' << s.col << ':' << s.passenger << ':' << s.destination << ':' << s.fuel;
  return os.str();
}

TaxiDomain build_taxi(const TaxiParams& p) {
  if (p.p_stay < 0 || p.p_stay >= 1) throw std::invalid_argument("build_taxi: p_stay must lie in [0, 1)");
  if (p.fuel_max < 1) throw std::invalid_argument("build_taxi: fuel_max must be positive");
  TaxiDomain d{.mdp = {}, .codec = TaxiCodec(p.fuel_max), .params = p, .position = {}, .fuel_free = {}, .subgoals = {}};
  const TaxiCodec& codec = d.codec;
  const Index n = codec.states() + 1;
  const Index sink = codec.sink();
  const double stay = p.p_stay;

  static constexpr std::array<std::pair<int, int>, 4> moves{{{-1, 0}, {1, 0}, {0, 1}, {0, -1}}};
  const std::vector<std::string> names{"north", "south", "east", "west", "pickup", "dropoff", "refuel"};
  std::vector<ActionBuilder> acts(names.size(), ActionBuilder(n));

  for (Index i = 0; i < codec.states(); ++i) {
    const TaxiState s = codec.decode(i);
    const Cell here{s.row, s.col};
    for (std::size_t a = 0; a < moves.size(); ++a) {
      const auto [dr, dc] = moves[a];
      Index next;
      double r;
      if (s.fuel == 0) {
        next = sink;
        r = kOutOfFuel;
      } else {
        TaxiState t = s;
        if (!taxi_blocked(here, dr, dc)) {
          t.row += dr;
          t.col += dc;
        }
        t.fuel -= 1;
        next = codec.encode(t);
        r = kStep;
      }
      acts[a].set(i, (1 - stay) * r + stay * kStep, {{next, 1 - stay}, {i, stay}});
    }

    if (s.passenger < kInTaxi && here == p.depots[std::size_t(s.passenger)]) {
      TaxiState t = s;
      t.passenger = kInTaxi;
      acts[4].set(i, kStep, {{codec.encode(t), 1.0}});
    } else {
      acts[4].set(i, kIllegal, {{i, 1.0}});
    }

    if (s.passenger == kInTaxi && here == p.depots[std::size_t(s.destination)])
      acts[5].set(i, kDelivery, {{sink, 1.0}});
    else
      acts[5].set(i, kIllegal, {{i, 1.0}});

    if (here == p.pump) {
      TaxiState t = s;
      t.fuel = p.fuel_max;
      acts[6].set(i, kStep, {{codec.encode(t), 1.0}});
    } else {
      acts[6].set(i, kIllegal, {{i, 1.0}});
    }
  }
  for (auto& a : acts) a.set(sink, 0.0, {{sink, 1.0}});

  std::vector<ModelD> models;
  for (const auto& a : acts) models.push_back(a.finish(1.0));
  d.mdp = MdpD(1.0, names, std::move(models), sink);

  std::vector<std::int32_t> pos(static_cast<std::size_t>(n)), free(static_cast<std::size_t>(n));
  for (Index i = 0; i < codec.states(); ++i) {
    const TaxiState s = codec.decode(i);
    pos[std::size_t(i)] = s.row * TaxiCodec::kGrid + s.col;
    free[std::size_t(i)] =
        ((s.row * TaxiCodec::kGrid + s.col) * TaxiCodec::kPassenger + s.passenger) * TaxiCodec::kDestination +
        s.destination;
  }
  pos[std::size_t(sink)] = TaxiCodec::kGrid * TaxiCodec::kGrid;
  free[std::size_t(sink)] = TaxiCodec::kGrid * TaxiCodec::kGrid * TaxiCodec::kPassenger * TaxiCodec::kDestination;
  d.position = build_hard_aggregation(n, pos, sink);
  d.fuel_free = build_hard_aggregation(n, free, sink);

  const Index m = d.position.aggregate_size();
  const double magnitude = 2.0 * d.mdp.max_abs_reward() * double(m);
  const char* labels[] = {"R", "G", "Y", "B"};
  for (std::size_t k = 0; k < p.depots.size(); ++k) {
    const Index cell = p.depots[k].row * TaxiCodec::kGrid + p.depots[k].col;
    d.subgoals.push_back(make_subgoal<double>(std::string("to-") + labels[k], m, {cell}, magnitude));
  }
  d.subgoals.push_back(
      make_subgoal<double>("to-pump", m, {Index(p.pump.row * TaxiCodec::kGrid + p.pump.col)}, magnitude));
  return d;
}

}  // namespace hvi
