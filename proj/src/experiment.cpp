#include "hvi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace hvi {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::pair<Algorithm, std::string>>& algorithm_names() {
  static const std::vector<std::pair<Algorithm, std::string>> names{
      {Algorithm::PlainVi, "plain-vi"},
      {Algorithm::ModelVi, "model-vi"},
      {Algorithm::Options, "options"},
      {Algorithm::Aggregation, "aggregation"},
      {Algorithm::OptionsAggregation, "options+aggregation"},
      {Algorithm::ApproxAggregation, "approx-aggregation"},
  };
  return names;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument("bad " + what + " '" + s + "'");
  return v;
}

DomainBundle taxi_bundle(const std::string& id, double p_stay) {
  TaxiParams tp;
  tp.p_stay = p_stay;
  TaxiDomain t = build_taxi(tp);
  DomainBundle d;
  d.id = id;
  d.mdp = std::move(t.mdp);
  d.levels.push_back({t.position, std::move(t.subgoals)});
  d.joint_goals = true;
  d.value_aggregation = t.fuel_free;
  d.approx_aggregation = std::move(t.fuel_free);
  d.describe = [codec = t.codec](Index i) { return codec.describe(i); };
  return d;
}

DomainBundle hanoi_bundle(const std::string& id, int disks, double p_stay) {
  HanoiDomain h = build_hanoi({disks, p_stay});
  DomainBundle d;
  d.id = id;
  d.mdp = std::move(h.mdp);
  for (auto& l : h.levels) d.levels.push_back({std::move(l.agg), std::move(l.goals)});
  d.joint_goals = false;
  if (!d.levels.empty()) d.value_aggregation = d.levels.back().agg;
  d.describe = [codec = h.codec](Index i) { return codec.describe(i); };
  return d;
}

DomainBundle puzzle8_bundle() {
  Puzzle8Domain p = build_puzzle8();
  DomainBundle d;
  d.id = "puzzle8";
  d.mdp = std::move(p.mdp);
  d.levels.push_back({p.labeled, {std::move(p.subgoal)}});
  d.value_aggregation = std::move(p.labeled);
  d.init_train_sweeps = 9;
  d.describe = [codec = p.codec](Index i) { return codec.describe(i); };
  return d;
}

/// Full-space copies of every level's subgoals (G lifted through phi).
std::vector<SubgoalD> lifted_goals(const DomainBundle& d, const std::vector<std::string>& pick) {
  std::vector<SubgoalD> out;
  for (const auto& level : d.levels)
    for (const auto& g : level.goals)
      if (pick.empty() || std::find(pick.begin(), pick.end(), g.name) != pick.end())
        out.push_back({g.name, upscale_value(g.G, level.agg)});
  return out;
}

std::vector<SubgoalD> selected(const std::vector<SubgoalD>& goals, const std::vector<std::string>& pick) {
  if (pick.empty()) return goals;
  std::vector<SubgoalD> out;
  for (const auto& g : goals)
    if (std::find(pick.begin(), pick.end(), g.name) != pick.end()) out.push_back(g);
  return out;
}

/// Accumulates appended macros and, for truncated training, their masks.
struct ExtendedMdp {
  MdpD mdp;
  std::vector<std::vector<std::uint8_t>> masks;
  bool restricted = false;

  void append(const MacroSet<double>& set, const std::vector<SubgoalD>& goals, const Aggregation& agg) {
    std::vector<std::string> names;
    for (const auto& g : goals) names.push_back(g.name);
    if (restricted) {
      masks.resize(std::size_t(mdp.action_count()), std::vector<std::uint8_t>(std::size_t(mdp.size()), 1));
      for (const auto& opt : set.options) masks.push_back(option_initiation_mask(opt, agg));
    }
    mdp = mdp.with_actions(set.macros, names);
  }

  InitiationSets init() const { return restricted ? InitiationSets{masks} : InitiationSets{}; }
};

/// Solves `goals` over `small` (jointly or one at a time) and upscales.
MacroSet<double> solve_level(const MdpD& full, const Aggregation& agg, const std::vector<SubgoalD>& goals,
                             bool joint, const SolveOptions& train, Index& sweeps) {
  const MdpD small = compress_mdp(full, agg);
  MacroOptions mo;
  mo.solve = train;
  std::vector<ModelD> solved;
  if (joint) {
    auto [models, rep] = multi_subgoal_vi(small, goals, train);
    sweeps += rep.iterations;
    solved = std::move(models);
  } else {
    for (const auto& g : goals) {
      auto [m, rep] = subgoal_vi(small, g, InitiationSets{}, train);
      sweeps += rep.iterations;
      solved.push_back(std::move(m));
    }
  }
  return upscale_solutions(full, agg, small, goals, solved, mo);
}

struct Finish {
  ValueD value;
  Index sweeps;
};

Finish finish(const ExtendedMdp& ext, const ExperimentConfig& cfg, const SolveOptions& opts) {
  if (cfg.finish_with_model) {
    if (ext.restricted) throw UnsupportedError("model VI finish does not support initiation sets");
    auto [m, rep] = model_vi(ext.mdp, opts);
    return {value_of_model(m), rep.iterations};
  }
  auto [v, rep] = plain_vi(ext.mdp, pessimistic_start(ext.mdp), opts, ext.init());
  return {std::move(v), rep.iterations};
}

std::string label_for(const ExperimentConfig& cfg) {
  std::string s = to_string(cfg.algorithm);
  if (cfg.train_sweeps > 0) s += " (init set, k=" + std::to_string(cfg.train_sweeps) + ")";
  if (cfg.finish_with_model) s += " (model finish)";
  return s;
}

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& [k, v] : algorithm_names())
    if (k == a) return v;
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [k, v] : algorithm_names())
    if (v == name) return k;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string ResultRow::phases() const {
  if (!aggregate_sweeps) return std::to_string(full_sweeps);
  // The approximate solve has no full-space phase.
  if (approximate) return std::to_string(*aggregate_sweeps);
  return std::to_string(*aggregate_sweeps) + " + " + std::to_string(full_sweeps);
}

DomainBundle load_domain(const std::string& id) {
  if (id == "taxi") return taxi_bundle(id, 0.0);
  if (id == "taxi-stoch") return taxi_bundle(id, 0.05);
  if (id == "puzzle8") return puzzle8_bundle();
  const auto parts = split(id, ':');
  if (!parts.empty() && (parts[0] == "hanoi" || parts[0] == "hanoi-stoch")) {
    if (parts.size() != 2) throw std::invalid_argument("expected " + parts[0] + ":<disks>");
    return hanoi_bundle(id, parse_int(parts[1], "disk count"), parts[0] == "hanoi" ? 0.0 : 0.05);
  }
  if (!parts.empty() && parts[0] == "random") {
    if (parts.size() < 2 || parts.size() > 5) throw std::invalid_argument("expected random:<n>[:<actions>[:<gamma>[:<seed>]]]");
    RandomMdpParams p;
    p.states = parse_int(parts[1], "state count");
    if (parts.size() > 2) p.actions = parse_int(parts[2], "action count");
    if (parts.size() > 3) p.gamma = std::stod(parts[3]);
    if (parts.size() > 4) p.seed = std::uint64_t(parse_int(parts[4], "seed"));
    DomainBundle d;
    d.id = id;
    d.mdp = random_mdp(p);
    return d;
  }
  if (std::filesystem::exists(id)) {
    DomainBundle d;
    d.id = id;
    d.mdp = load_mdp(id);
    return d;
  }
  throw std::invalid_argument("unknown domain '" + id + "'");
}

ValueD reference_value(const DomainBundle& d, double eps) {
  SolveOptions o;
  o.eps = eps;
  return plain_vi(d.mdp, pessimistic_start(d.mdp), o).first;
}

ResultRow run_experiment(const DomainBundle& d, const ExperimentConfig& cfg, const ValueD* reference) {
  if (!(cfg.eps > 0)) throw std::invalid_argument("eps must be positive");
  if (cfg.train_sweeps < 0) throw std::invalid_argument("train_sweeps must be non-negative");
  SolveOptions opts;
  opts.eps = cfg.eps;
  opts.cap = cfg.cap;
  SolveOptions train = opts;
  if (cfg.train_sweeps > 0) {
    train.cap = cfg.train_sweeps;
    train.truncate = true;
  }
  const bool uses_levels = cfg.algorithm == Algorithm::Options || cfg.algorithm == Algorithm::OptionsAggregation;
  if (uses_levels && d.levels.empty()) throw UnsupportedError(d.id + " has no subgoals for " + to_string(cfg.algorithm));
  if (!uses_levels && (cfg.train_sweeps > 0 || cfg.finish_with_model))
    throw UnsupportedError("training and finish options apply to the options pipelines only");

  ResultRow row;
  row.domain = d.id;
  row.algorithm = cfg.algorithm;
  row.label = label_for(cfg);
  const auto start = Clock::now();

  switch (cfg.algorithm) {
    case Algorithm::PlainVi: {
      auto [v, rep] = plain_vi(d.mdp, pessimistic_start(d.mdp), opts);
      row.value = std::move(v);
      row.full_sweeps = rep.iterations;
      break;
    }
    case Algorithm::ModelVi: {
      auto [m, rep] = model_vi(d.mdp, opts);
      row.value = value_of_model(m);
      row.full_sweeps = rep.iterations;
      break;
    }
    case Algorithm::Options: {
      const auto goals = lifted_goals(d, cfg.subgoals);
      if (goals.empty()) throw UnsupportedError("no subgoal matches the selection");
      const Aggregation id = identity_aggregation(d.mdp.size(), d.mdp.sink());
      ExtendedMdp ext{d.mdp, {}, cfg.train_sweeps > 0};
      Index sweeps = 0;
      ext.append(solve_level(d.mdp, id, goals, true, train, sweeps), goals, id);
      auto f = finish(ext, cfg, opts);
      row.aggregate_sweeps = sweeps;
      row.value = std::move(f.value);
      row.full_sweeps = f.sweeps;
      break;
    }
    case Algorithm::OptionsAggregation: {
      ExtendedMdp ext{d.mdp, {}, cfg.train_sweeps > 0};
      Index sweeps = 0;
      bool any = false;
      for (const auto& level : d.levels) {
        const auto goals = selected(level.goals, cfg.subgoals);
        if (goals.empty()) continue;
        any = true;
        ext.append(solve_level(ext.mdp, level.agg, goals, d.joint_goals, train, sweeps), goals, level.agg);
      }
      if (!any) throw UnsupportedError("no subgoal matches the selection");
      auto f = finish(ext, cfg, opts);
      row.aggregate_sweeps = sweeps;
      row.value = std::move(f.value);
      row.full_sweeps = f.sweeps;
      break;
    }
    case Algorithm::Aggregation: {
      if (!d.value_aggregation) throw UnsupportedError(d.id + " has no aggregation");
      const MdpD small = compress_mdp(d.mdp, *d.value_aggregation);
      auto [ms, rs] = model_vi(small, opts);
      const ValueD vbar = upscale_value(value_of_model(ms), *d.value_aggregation);
      auto [m, rep] = model_vi(d.mdp, greedy_model(d.mdp, {}, vbar), opts);
      row.aggregate_sweeps = rs.iterations;
      row.value = value_of_model(m);
      row.full_sweeps = rep.iterations;
      break;
    }
    case Algorithm::ApproxAggregation: {
      const auto& agg = d.approx_aggregation ? d.approx_aggregation : d.value_aggregation;
      if (!agg) throw UnsupportedError(d.id + " has no aggregation");
      const MdpD small = compress_mdp(d.mdp, *agg);
      auto [ms, rs] = model_vi(small, opts);
      row.aggregate_sweeps = rs.iterations;
      row.value = upscale_value(value_of_model(ms), *agg);
      row.approximate = true;
      break;
    }
  }
  row.seconds = std::chrono::duration<double>(Clock::now() - start).count();

  const ValueD ref = reference ? *reference : reference_value(d);
  row.deviation = d.mdp.size() > 0 ? (row.value.values() - ref.values()).cwiseAbs().maxCoeff() : 0.0;
  return row;
}

ResultRow run_experiment(const ExperimentConfig& cfg) { return run_experiment(load_domain(cfg.domain), cfg); }

std::vector<ExperimentConfig> comparison_configs(const DomainBundle& d, double eps, Index cap) {
  std::vector<ExperimentConfig> out;
  auto add = [&](Algorithm a, int train = 0, bool model_finish = false) {
    ExperimentConfig c;
    c.domain = d.id;
    c.algorithm = a;
    c.eps = eps;
    c.cap = cap;
    c.train_sweeps = train;
    c.finish_with_model = model_finish;
    out.push_back(std::move(c));
  };
  add(Algorithm::ModelVi);
  add(Algorithm::PlainVi);
  if (!d.levels.empty()) {
    add(Algorithm::Options);
    add(Algorithm::OptionsAggregation);
    add(Algorithm::OptionsAggregation, 0, true);
    if (d.init_train_sweeps > 0) add(Algorithm::OptionsAggregation, d.init_train_sweeps);
  }
  if (d.value_aggregation) add(Algorithm::Aggregation);
  if (d.approx_aggregation) add(Algorithm::ApproxAggregation);
  return out;
}

Comparison compare_all(const DomainBundle& d, double eps, Index cap, double tolerance) {
  Comparison c;
  c.domain = d.id;
  const ValueD ref = reference_value(d, std::min(eps, 1e-11));
  for (const auto& cfg : comparison_configs(d, eps, cap)) c.rows.push_back(run_experiment(d, cfg, &ref));

  std::string worst;
  for (std::size_t a = 0; a < c.rows.size(); ++a) {
    if (c.rows[a].approximate) continue;
    for (std::size_t b = a + 1; b < c.rows.size(); ++b) {
      if (c.rows[b].approximate || d.mdp.size() == 0) continue;
      const double gap = (c.rows[a].value.values() - c.rows[b].value.values()).cwiseAbs().maxCoeff();
      if (gap > c.disagreement) {
        c.disagreement = gap;
        worst = c.rows[a].label + " vs " + c.rows[b].label;
      }
    }
  }
  if (c.disagreement > tolerance) {
    std::ostringstream msg;
    msg << d.id << ": exact algorithms disagree (" << worst << ", sup-norm " << c.disagreement << ")\n"
        << format_table(c);
    throw ExactnessError(msg.str());
  }
  return c;
}

std::string format_table(const Comparison& c) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"algorithm", "sweeps", "time [s]", "max |V - V*|", "note"});
  for (const auto& r : c.rows) {
    std::ostringstream t, dev;
    t << std::fixed << std::setprecision(3) << r.seconds;
    dev << std::scientific << std::setprecision(2) << r.deviation;
    cells.push_back({r.label, r.phases(), t.str(), dev.str(), r.approximate ? "approximate" : ""});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells)
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  std::ostringstream out;
  out << "domain: " << c.domain << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t k = 0; k < 5; ++k) {
      const bool left = k == 0 || k == 4;
      out << (k ? "  " : "") << (left ? std::left : std::right) << std::setw(int(width[k])) << cells[i][k];
    }
    out << '\n';
    if (i == 0) out << std::string(width[0] + width[1] + width[2] + width[3] + width[4] + 8, '-') << '\n';
  }
  return out.str();
}

std::string format_grid(const Comparison& c) {
  auto find = [&](Algorithm a) -> std::string {
    for (const auto& r : c.rows)
      if (r.algorithm == a && r.label == to_string(a)) return r.phases() + " sweeps";
    return "-";
  };
  const std::array<std::string, 4> cell{find(Algorithm::ModelVi), find(Algorithm::Aggregation),
                                        find(Algorithm::Options), find(Algorithm::OptionsAggregation)};
  std::size_t w = 14;
  for (const auto& s : cell) w = std::max(w, s.size());
  std::ostringstream out;
  out << std::left << std::setw(12) << "" << std::setw(int(w) + 2) << "no aggregation" << "aggregation\n"
      << std::setw(12) << "no options" << std::setw(int(w) + 2) << cell[0] << cell[1] << '\n'
      << std::setw(12) << "options" << std::setw(int(w) + 2) << cell[2] << cell[3] << '\n';
  return out.str();
}

std::string format_json(const Comparison& c) {
  std::string out;
  for (const auto& r : c.rows) {
    nlohmann::json j{{"domain", r.domain},
                     {"algorithm", to_string(r.algorithm)},
                     {"label", r.label},
                     {"full_sweeps", r.full_sweeps},
                     {"seconds", r.seconds},
                     {"deviation", r.deviation},
                     {"approximate", r.approximate}};
    j["aggregate_sweeps"] = r.aggregate_sweeps ? nlohmann::json(*r.aggregate_sweeps) : nlohmann::json(nullptr);
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace hvi
