#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hvi/domains.hpp"
#include "hvi/experiment.hpp"
#include "hvi/io.hpp"
#include "oracles.hpp"

using namespace hvi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hvi_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

bool same_mdp(const MdpD& a, const MdpD& b) {
  if (a.size() != b.size() || a.action_count() != b.action_count() || a.gamma() != b.gamma() || a.sink() != b.sink())
    return false;
  for (Index k = 0; k < a.action_count(); ++k)
    if (a.name(k) != b.name(k) || max_abs_diff(a.action(k), b.action(k)) != 0) return false;
  return true;
}

ParseError parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_mdp(in);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("no parse error");
  return ParseError(0, 0, "");
}

}  // namespace

TEST_CASE("Taxi survives a save and load bit for bit") {
  const auto taxi = build_taxi({.p_stay = 0.05});
  const auto path = scratch("taxi.mdp");
  save_mdp(path.string(), taxi.mdp);
  CHECK(same_mdp(load_mdp(path.string()), taxi.mdp));
}

TEST_CASE("discounted models round trip despite the folded discount") {
  for (double g : {0.8, 0.9, 0.95, 0.3}) {
    const auto mdp = random_mdp({.states = 40, .actions = 3, .gamma = g, .seed = 11, .max_successors = 5});
    std::stringstream s;
    write_mdp(s, mdp);
    CHECK(same_mdp(read_mdp(s), mdp));
  }
}

TEST_CASE("minimal file parses without a checksum") {
  std::istringstream in("# one state\nmdp n=1 gamma=0.5 actions=1 sink=none\naction stay\nr 0 2\nt 0 0 1\nend\n");
  const auto mdp = read_mdp(in);
  CHECK(mdp.size() == 1);
  CHECK(mdp.action(0).row(0).coeff(0) == 0.5);
  CHECK(mdp.action(0).reward()[0] == 2);
}

TEST_CASE("parse errors carry a position") {
  const auto e = parse_error("mdp n=2 gama=1 actions=1 sink=none\n");
  CHECK(e.line == 1);
  CHECK(e.column == 9);
  const auto bad_index = parse_error("mdp n=1 gamma=1 actions=1 sink=0\naction a\nt 0 3 1\nend\n");
  CHECK(bad_index.line == 3);
  CHECK(bad_index.column == 5);
  const auto stochastic = parse_error("mdp n=2 gamma=1 actions=1 sink=1\naction a\nt 0 1 0.7\nt 0 0 0.7\nt 1 1 1\nend\n");
  CHECK(stochastic.line == 2);
  CHECK(parse_error("mdp n=1 gamma=1 actions=2 sink=0\naction a\nt 0 0 1\nend\n").line == 4);
  CHECK(parse_error("").line == 1);
}

TEST_CASE("checksum mismatch is detected") {
  std::stringstream s;
  write_mdp(s, build_hanoi({3, 0.0}).mdp);
  std::string text = s.str();
  const auto at = text.find("r 0 -1");
  REQUIRE(at != std::string::npos);
  text.replace(at, 6, "r 0 -2");
  const auto e = parse_error(text);
  CHECK(std::string(e.what()).find("checksum mismatch") != std::string::npos);
}

TEST_CASE("missing files raise IO errors") {
  CHECK_THROWS_AS(load_mdp("/nonexistent/dir/x.mdp"), IoError);
  CHECK_THROWS_AS(export_value("/nonexistent/dir/x.csv", ValueD(2)), IoError);
}

TEST_CASE("value export") {
  std::ostringstream out;
  VectorX<double> v(2);
  v << 0, 1;
  write_value(out, ValueD(v));
  CHECK(out.str() == "0,,0\n1,,1\n");

  const auto taxi = build_taxi();
  const auto d = load_domain("taxi");
  VectorX<double> w = reference_value(d).values();
  w[3] = 0.1;  // not exactly representable in a short decimal
  const auto path = scratch("taxi.csv");
  export_value(path.string(), ValueD(w), d.describe);
  std::ifstream f(path);
  int lines = 0;
  for (std::string l; std::getline(f, l);) ++lines;
  CHECK(lines == 7001);
  CHECK(import_value(path.string()).values() == w);
}

TEST_CASE("experiments are deterministic") {
  const auto d = load_domain("hanoi:4");
  ExperimentConfig cfg;
  cfg.domain = "hanoi:4";
  cfg.algorithm = Algorithm::OptionsAggregation;
  const auto a = run_experiment(d, cfg), b = run_experiment(d, cfg);
  CHECK(a.aggregate_sweeps == b.aggregate_sweeps);
  CHECK(a.full_sweeps == b.full_sweeps);
  CHECK(a.value.values() == b.value.values());
}

TEST_CASE("compare on Hanoi: every exact variant finds V*") {
  const auto d = load_domain("hanoi:3");
  const auto c = compare_all(d, 1e-9);
  CHECK(c.disagreement <= 1e-8);
  CHECK(c.rows.size() >= 5);
  for (const auto& r : c.rows) {
    CHECK(r.deviation >= 0);
    if (!r.approximate) CHECK(r.deviation <= 1e-8);
  }
  CHECK(format_table(c).find("plain-vi") != std::string::npos);
  std::istringstream json(format_json(c));
  std::size_t n = 0;
  for (std::string l; std::getline(json, l); ++n) CHECK(nlohmann::json::parse(l).contains("deviation"));
  CHECK(n == c.rows.size());
}

TEST_CASE("degenerate one-state MDP gives a trivial table") {
  const auto path = scratch("one.mdp");
  write_file(path, "mdp n=1 gamma=1 actions=1 sink=0\naction stay\nt 0 0 1\nend\n");
  const auto d = load_domain(path.string());
  const auto c = compare_all(d, 1e-9);
  REQUIRE(c.rows.size() == 2);
  for (const auto& r : c.rows) {
    CHECK(r.value[0] == 0);
    CHECK(r.full_sweeps == 1);
  }
}

TEST_CASE("unsupported combinations and names are rejected") {
  ExperimentConfig cfg;
  cfg.domain = "random:10";
  cfg.algorithm = Algorithm::OptionsAggregation;
  CHECK_THROWS_AS(run_experiment(cfg), UnsupportedError);
  cfg.domain = "hanoi:3";
  cfg.eps = 0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_algorithm("magic"), std::invalid_argument);
  CHECK(parse_algorithm("options+aggregation") == Algorithm::OptionsAggregation);
  CHECK(to_string(Algorithm::ApproxAggregation) == "approx-aggregation");
  CHECK_THROWS(load_domain("hanoi:x"));
  CHECK_THROWS(load_domain("nosuchdomain"));
}

TEST_CASE("phase summary") {
  ResultRow r;
  r.full_sweeps = 7;
  CHECK(r.phases() == "7");
  r.aggregate_sweeps = 17;
  CHECK(r.phases() == "17 + 7");
}
