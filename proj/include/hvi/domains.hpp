#pragma once

// Benchmark MDPs: fuel Taxi, Towers of Hanoi and the 8-puzzle, each with the
// aggregations and subgoals used by the hierarchical solver. All three are
// undiscounted with an absorbing sink as the last state.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hvi/aggregation.hpp"
#include "hvi/model.hpp"
#include "hvi/vi.hpp"

namespace hvi {

using MdpD = Mdp<double>;
using ModelD = MatrixModel<double>;
using ValueD = ValueFunction<double>;
using SubgoalD = SubgoalSpec<double>;

struct InvalidStateError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------- Taxi

struct Cell {
  int row;
  int col;
  bool operator==(const Cell&) const = default;
};

struct TaxiParams {
  double p_stay = 0.0;
  int fuel_max = 13;
  std::array<Cell, 4> depots{{{0, 0}, {0, 4}, {4, 0}, {4, 3}}};
  Cell pump{3, 2};
};

/// Semantic Taxi state. passenger is a depot index 0..3 or 4 (in the taxi).
struct TaxiState {
  int row = 0;
  int col = 0;
  int passenger = 0;
  int destination = 0;
  int fuel = 0;
  bool operator==(const TaxiState&) const = default;
};

class TaxiCodec {
 public:
  static constexpr int kGrid = 5;
  static constexpr int kPassenger = 5;
  static constexpr int kDestination = 4;

  explicit TaxiCodec(int fuel_max = 13) : fuel_levels_(fuel_max + 1) {}

  Index states() const { return Index(kGrid) * kGrid * kPassenger * kDestination * fuel_levels_; }
  Index sink() const { return states(); }
  Index encode(const TaxiState& s) const;
  TaxiState decode(Index i) const;
  std::string describe(Index i) const;

 private:
  int fuel_levels_;
};

struct TaxiDomain {
  MdpD mdp;
  TaxiCodec codec;
  TaxiParams params;
  /// Taxi position only; m = 25 + sink.
  Aggregation position;
  /// Everything but fuel; m = 500 + sink.
  Aggregation fuel_free;
  /// On the position aggregation: one per depot, then the pump.
  std::vector<SubgoalD> subgoals;
};

TaxiDomain build_taxi(const TaxiParams& p = {});

/// Whether a move from `from` in direction (dr, dc) is blocked by a wall or
/// the grid edge.
bool taxi_blocked(Cell from, int dr, int dc);

// ---------------------------------------------------------------- Hanoi

struct HanoiParams {
  int disks = 3;
  double p_stay = 0.0;
};

/// Pegs are 1..3; element 0 is the smallest disk (least significant digit).
class HanoiCodec {
 public:
  explicit HanoiCodec(int disks) : disks_(disks) {}
  int disks() const { return disks_; }
  Index states() const;
  Index sink() const { return states(); }
  Index encode(const std::vector<int>& pegs) const;
  std::vector<int> decode(Index i) const;
  std::string describe(Index i) const;

 private:
  int disks_;
};

/// Sub-problem over the k smallest disks: aggregation plus one subgoal per peg.
struct HanoiLevel {
  int disks;
  Aggregation agg;
  std::vector<SubgoalD> goals;
};

struct HanoiDomain {
  MdpD mdp;
  HanoiCodec codec;
  /// Levels k = 2 .. r-1, in solving order.
  std::vector<HanoiLevel> levels;
};

HanoiDomain build_hanoi(const HanoiParams& p);

/// Number of legal moves (2 or 3) among the three actions in a state.
int hanoi_legal_moves(const std::vector<int>& pegs);

// ---------------------------------------------------------------- 8-puzzle

using Board = std::array<int, 9>;  // tile per cell, 0 is the blank

struct Puzzle8Params {
  Board goal{1, 2, 3, 4, 5, 6, 7, 8, 0};
  /// Group label per tile 1..8 (index 0 unused).
  std::array<int, 9> group{-1, 0, 0, 0, 1, 1, 1, 2, 2};
};

/// Indexes the 181440 boards whose tile inversion parity is even: blank cell
/// times 8!/2 plus half the lexicographic rank of the tile sequence.
class Puzzle8Codec {
 public:
  static constexpr Index kStates = 181440;
  Index states() const { return kStates; }
  Index sink() const { return kStates; }
  Index encode(const Board& b) const;
  Board decode(Index i) const;
  std::string describe(Index i) const;
};

/// Parity of the tile sequence (blank skipped); reachability invariant on a
/// 3 x 3 board.
bool puzzle8_even(const Board& b);

struct Puzzle8Domain {
  MdpD mdp;
  Puzzle8Codec codec;
  Puzzle8Params params;
  /// Board mapped to its group-labeled image, plus sink.
  Aggregation labeled;
  /// Every group on its goal cells.
  SubgoalD subgoal;
};

Puzzle8Domain build_puzzle8(const Puzzle8Params& p = {});

// ---------------------------------------------------------------- random

struct RandomMdpParams {
  Index states = 20;
  int actions = 3;
  double gamma = 0.9;
  std::uint64_t seed = 1;
  /// Successors per (state, action), drawn without replacement.
  int max_successors = 4;
};

/// Discounted MDP with rewards in [-1, 1] and sparse random transitions.
MdpD random_mdp(const RandomMdpParams& p);

}  // namespace hvi
