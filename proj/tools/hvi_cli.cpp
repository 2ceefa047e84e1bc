// hvi: solve benchmark MDPs with plain, model, option and aggregate value
// iteration and compare the variants.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "hvi/experiment.hpp"
#include "hvi/io.hpp"
#include "hvi/linfeat.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConvergence = 2, kExactness = 3, kIo = 4 };

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw hvi::IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f.flush()) throw hvi::IoError("write to '" + path + "' failed");
}

/// random:<n> without an explicit seed takes the --seed flag.
std::string with_seed(const std::string& domain, std::uint64_t seed) {
  if (domain.rfind("random:", 0) != 0) return domain;
  std::size_t colons = 0;
  for (char c : domain) colons += c == ':';
  std::string d = domain;
  if (colons == 1) d += ":3";
  if (colons <= 2) d += ":0.9";
  if (colons <= 3) d += ":" + std::to_string(seed);
  return d;
}

void print_row(const hvi::ResultRow& r) {
  std::cout << "domain:    " << r.domain << '\n'
            << "algorithm: " << r.label << '\n'
            << "sweeps:    " << r.phases() << '\n'
            << "time:      " << std::fixed << std::setprecision(3) << r.seconds << " s\n"
            << "deviation: " << std::scientific << std::setprecision(2) << r.deviation << '\n'
            << std::defaultfloat;
  if (r.approximate) std::cout << "note:      approximate\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value iteration with options and state aggregation"};
  app.require_subcommand(1);

  std::string domain, algo = "plain-vi", out;
  double eps = 1e-9;
  long long cap = 0;
  std::uint64_t seed = 1;
  int train = 0;
  bool model_finish = false;
  std::vector<std::string> subgoals;

  auto common = [&](CLI::App* s) {
    s->add_option("--eps", eps, "Convergence threshold on the sup-norm change")->check(CLI::PositiveNumber);
    s->add_option("--cap", cap, "Sweep cap (0 selects 10 n + 1000)")->check(CLI::NonNegativeNumber);
    s->add_option("--seed", seed, "Seed for random:<n> domains");
  };

  auto* solve = app.add_subcommand("solve", "Run one algorithm on a domain");
  solve->add_option("domain", domain, "taxi, taxi-stoch, hanoi:<r>, hanoi-stoch:<r>, puzzle8, random:<n>, or a file")
      ->required();
  solve->add_option("--algo", algo, "plain-vi, model-vi, options, aggregation, options+aggregation, approx-aggregation");
  solve->add_option("--out", out, "Write the resulting value function here");
  solve->add_option("--train", train, "Truncated subgoal training sweeps (adds initiation sets)");
  solve->add_flag("--model-finish", model_finish, "Finish option pipelines with model VI");
  solve->add_option("--subgoal", subgoals, "Restrict to these subgoals");
  common(solve);

  auto* compare = app.add_subcommand("compare", "Run every applicable algorithm and check they agree");
  compare->add_option("domain", domain)->required();
  compare->add_option("--out", out, "Write JSON rows here");
  common(compare);

  int level = 0;
  auto* macro = app.add_subcommand("build-macro", "Build the macros of one subgoal level");
  macro->add_option("domain", domain)->required();
  macro->add_option("--level", level, "Subgoal level (0 is solved first)")->check(CLI::NonNegativeNumber);
  macro->add_option("--subgoal", subgoals, "Restrict to these subgoals");
  macro->add_option("--out", out, "Save the MDP with the macros appended");
  common(macro);

  double gamma = 0.9;
  int steps = 200;
  auto* diag = app.add_subcommand("diagnose-linfeat", "Self-compose the projected linear-feature counterexample");
  diag->add_option("--gamma", gamma)->check(CLI::Range(0.0, 1.0));
  diag->add_option("--steps", steps)->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export", "Solve and write one line per state");
  exp->add_option("domain", domain)->required();
  exp->add_option("--algo", algo);
  exp->add_option("--out", out)->required();
  common(exp);

  auto* gen = app.add_subcommand("gen", "Write a domain as an MDP file");
  gen->add_option("domain", domain)->required();
  gen->add_option("--out", out)->required();
  common(gen);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string id = with_seed(domain, seed);
    if (*solve || *exp) {
      hvi::ExperimentConfig cfg;
      cfg.domain = id;
      cfg.algorithm = hvi::parse_algorithm(algo);
      cfg.eps = eps;
      cfg.cap = cap;
      cfg.train_sweeps = train;
      cfg.finish_with_model = model_finish;
      cfg.subgoals = subgoals;
      const hvi::DomainBundle d = hvi::load_domain(id);
      const hvi::ResultRow r = hvi::run_experiment(d, cfg);
      print_row(r);
      if (!out.empty()) {
        hvi::export_value(out, r.value, d.describe);
        std::cout << "wrote " << out << '\n';
      }
    } else if (*compare) {
      const hvi::DomainBundle d = hvi::load_domain(id);
      const hvi::Comparison c = hvi::compare_all(d, eps, cap);
      std::cout << hvi::format_table(c);
      if (id.rfind("taxi", 0) == 0) std::cout << '\n' << hvi::format_grid(c);
      std::cout << "all exact variants agree (max gap " << std::scientific << std::setprecision(2) << c.disagreement
                << ")\n";
      if (!out.empty()) write_text(out, hvi::format_json(c));
    } else if (*macro) {
      const hvi::DomainBundle d = hvi::load_domain(id);
      if (std::size_t(level) >= d.levels.size())
        throw hvi::UnsupportedError(id + " has " + std::to_string(d.levels.size()) + " subgoal level(s)");
      hvi::MdpD cur = d.mdp;
      hvi::SolveOptions so;
      so.eps = eps;
      so.cap = cap;
      hvi::MacroOptions mo;
      mo.solve = so;
      // Earlier levels are rebuilt so this level sees their macros.
      for (int l = 0; l <= level; ++l) {
        const auto& lv = d.levels[std::size_t(l)];
        std::vector<hvi::SubgoalD> goals;
        for (const auto& g : lv.goals)
          if (l < level || subgoals.empty() || std::find(subgoals.begin(), subgoals.end(), g.name) != subgoals.end())
            goals.push_back(g);
        std::vector<hvi::ModelD> macros;
        std::vector<std::string> names;
        for (const auto& g : goals) {
          hvi::SolveReport rep;
          macros.push_back(hvi::build_macro(cur, lv.agg, g, mo, &rep));
          names.push_back(g.name);
          if (l == level)
            std::cout << g.name << ": " << rep.iterations << " aggregate sweeps over " << lv.agg.aggregate_size()
                      << " states, " << macros.back().trans().nonzeros() << " nonzeros\n";
        }
        cur = cur.with_actions(macros, names);
      }
      if (!out.empty()) {
        hvi::save_mdp(out, cur);
        std::cout << "wrote " << out << '\n';
      }
    } else if (*diag) {
      if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("--gamma must lie strictly between 0 and 1");
      const hvi::DivergenceReport r = hvi::divergence_demo(gamma, steps);
      std::printf("%6s  %14s  %14s\n", "step", "reward-norm", "trans-norm");
      for (const auto& s : r.projected) std::printf("%6d  %14.6e  %14.6e\n", s.step, s.reward_norm, s.trans_norm);
      const auto& agg = r.aggregated.back();
      std::printf("aggregated after %d steps: reward-norm %.6e (bound %.6e), trans-norm %.6e\n", agg.step,
                  agg.reward_norm, r.aggregated_reward_bound, agg.trans_norm);
      std::printf("VERDICT: %s (rho=%.10g)\n", r.diverges ? "diverges" : "converges", r.rho);
    } else if (*gen) {
      const hvi::DomainBundle d = hvi::load_domain(id);
      hvi::save_mdp(out, d.mdp);
      std::cout << "wrote " << out << " (" << d.mdp.size() << " states, " << d.mdp.action_count() << " actions)\n";
    }
  } catch (const hvi::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConvergence;
  } catch (const hvi::ExactnessError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExactness;
  } catch (const hvi::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
