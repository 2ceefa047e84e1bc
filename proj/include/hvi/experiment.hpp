#pragma once

// Experiment pipelines over the benchmark domains and the cross-algorithm
// comparison table.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvi/aggregation.hpp"
#include "hvi/domains.hpp"
#include "hvi/io.hpp"

namespace hvi {

enum class Algorithm { PlainVi, ModelVi, Options, Aggregation, OptionsAggregation, ApproxAggregation };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct UnsupportedError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when exact algorithms disagree on V*.
struct ExactnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One layer of subgoals: solved in the aggregate space of `agg`, upscaled,
/// and appended to the action set before the next layer is compressed.
struct SubgoalLevel {
  Aggregation agg;
  std::vector<SubgoalD> goals;
};

struct DomainBundle {
  std::string id;
  MdpD mdp;
  std::vector<SubgoalLevel> levels;
  /// Solve a level's goals jointly (shared candidate models) or one by one.
  bool joint_goals = true;
  /// Aggregation used by the value warm start.
  std::optional<Aggregation> value_aggregation;
  /// Aggregation used by the approximate solve.
  std::optional<Aggregation> approx_aggregation;
  /// Truncated subgoal training length used by the initiation-set row of the
  /// comparison; 0 when the domain has no such variant.
  int init_train_sweeps = 0;
  StateDescriber describe;
};

/// taxi, taxi-stoch, hanoi:<r>, hanoi-stoch:<r>, puzzle8,
/// random:<n>[:<actions>[:<gamma>[:<seed>]]], or a path to an MDP file.
DomainBundle load_domain(const std::string& id);

struct ExperimentConfig {
  std::string domain;
  Algorithm algorithm = Algorithm::PlainVi;
  double eps = 1e-9;
  Index cap = 0;
  /// Subgoal names to use; empty selects all.
  std::vector<std::string> subgoals;
  /// > 0: train subgoals for this many sweeps only and restrict each macro
  /// to the states where it does not terminate.
  int train_sweeps = 0;
  /// Finish the options pipelines with model VI instead of plain VI.
  bool finish_with_model = false;
};

struct ResultRow {
  std::string domain;
  std::string label;
  Algorithm algorithm = Algorithm::PlainVi;
  /// Sweeps spent on subgoals or the aggregate problem, if the pipeline has
  /// such a phase.
  std::optional<Index> aggregate_sweeps;
  Index full_sweeps = 0;
  double seconds = 0.0;
  /// Sup-norm distance of `value` from the reference V*.
  double deviation = 0.0;
  bool approximate = false;
  ValueD value;

  /// "17 + 7" style phase summary.
  std::string phases() const;
};

/// V* by plain VI with a tight tolerance, used as the reference for
/// deviations.
ValueD reference_value(const DomainBundle& d, double eps = 1e-11);

ResultRow run_experiment(const DomainBundle& d, const ExperimentConfig& cfg, const ValueD* reference = nullptr);
ResultRow run_experiment(const ExperimentConfig& cfg);

/// The configurations compare_all runs for a domain, in table order.
std::vector<ExperimentConfig> comparison_configs(const DomainBundle& d, double eps, Index cap = 0);

struct Comparison {
  std::string domain;
  std::vector<ResultRow> rows;
  /// Largest pairwise sup-norm gap between exact rows.
  double disagreement = 0.0;
};

/// Runs every applicable algorithm and throws ExactnessError when two exact
/// rows differ by more than `tolerance`.
Comparison compare_all(const DomainBundle& d, double eps, Index cap = 0, double tolerance = 1e-8);

std::string format_table(const Comparison& c);
/// Taxi layout: options (no / yes) by aggregation (no / yes).
std::string format_grid(const Comparison& c);
/// One JSON object per row, newline separated.
std::string format_json(const Comparison& c);

}  // namespace hvi
