#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hvi/aggregation.hpp"
#include "hvi/domains.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace hvi;

namespace {

double sup(const VectorX<double>& a, const VectorX<double>& b) { return (a - b).cwiseAbs().maxCoeff(); }

Aggregation random_aggregation(std::uint64_t seed, Index n, Index m) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::vector<std::int32_t> map(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) map[std::size_t(i)] = std::int32_t(i < m ? i : Index(rng() % std::uint32_t(m)));
  std::shuffle(map.begin(), map.end(), rng);
  return build_hard_aggregation(n, map, std::nullopt);
}

}  // namespace

TEST_CASE("compression equals D P Phi and D R") {
  const auto dense = oracle::random_dense(4, 17, 2, 0.9);
  const auto mdp = oracle::to_mdp(dense);
  const auto agg = random_aggregation(4, 17, 5);
  const Eigen::MatrixXd phi = Eigen::MatrixXd(agg.phi_matrix());
  const Eigen::MatrixXd d = Eigen::MatrixXd(agg.disaggregation_matrix());
  for (Index a = 0; a < 2; ++a) {
    const auto c = compress_action(mdp.action(a), agg);
    const Eigen::MatrixXd expect = d * dense.P[std::size_t(a)] * phi;
    CHECK((Eigen::MatrixXd(c.trans().to_eigen()) - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(sup(c.reward(), d * dense.R[std::size_t(a)]) < 1e-14);
    for (Index x = 0; x < 5; ++x) CHECK(c.row(x).sum() == doctest::Approx(0.9));
  }
}

TEST_CASE("identity aggregation leaves actions unchanged") {
  const auto mdp = oracle::to_mdp(oracle::random_dense(5, 11, 3, 0.8));
  const auto agg = identity_aggregation(11);
  for (Index a = 0; a < 3; ++a) CHECK(max_abs_diff(compress_action(mdp.action(a), agg), mdp.action(a)) == 0);
}

TEST_CASE("aggregation validation") {
  CHECK_THROWS(build_hard_aggregation(3, {0, 1}, std::nullopt));
  CHECK_THROWS(build_hard_aggregation(3, {0, 2, 2}, std::nullopt));   // aggregate 1 is empty
  CHECK_THROWS(build_hard_aggregation(3, {0, -1, 1}, std::nullopt));
  CHECK_THROWS(build_hard_aggregation(3, {0, 1, 1}, Index(2)));      // sink shares its aggregate
  const auto ok = build_hard_aggregation(3, {0, 0, 1}, Index(2));
  CHECK(ok.sink() == Index(1));
  CHECK(ok.preimage_size(0) == 2);
}

TEST_CASE("appended macros keep V* on random MDPs") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Index n = 10 + Index(seed) * 3;
    const auto dense = oracle::random_dense(seed + 100, n, 3, 0.9);
    const auto mdp = oracle::to_mdp(dense);
    const auto agg = random_aggregation(seed, n, 4);
    const auto g = make_subgoal<double>("g", 4, {Index(seed % 4)}, default_subgoal_magnitude(mdp));
    const auto macro = build_macro(mdp, agg, g);
    for (Index i = 0; i < n; ++i) {
      CHECK(macro.row(i).sum() <= 1.0 + 1e-12);
      CHECK_FALSE(macro.row(i).is_unit(i));
    }
    SolveOptions o;
    o.eps = 1e-12;
    const auto ext = mdp.with_actions({macro}, {"macro"});
    const auto [v, rep] = plain_vi(ext, ValueD(n), o);
    CHECK(sup(v.values(), oracle::policy_iteration(dense)) < 1e-8);
  }
}

TEST_CASE("corridor macro reward is the discounted path reward") {
  const double gamma = 0.9;
  const auto mdp = fixture::walled_corridor(10, gamma);
  const auto g = make_subgoal<double>("end", 10, {9}, default_subgoal_magnitude(mdp));
  const auto macro = build_macro(mdp, identity_aggregation(10), g);
  for (Index i = 0; i < 9; ++i) {
    const int d = 9 - int(i);
    CHECK(macro.reward()[i] == doctest::Approx(-(1 - std::pow(gamma, d)) / (1 - gamma)).epsilon(1e-12));
    CHECK(macro.row(i).sum() == macro.row(i).coeff(9));
    CHECK(macro.row(i).coeff(9) == doctest::Approx(std::pow(gamma, d)).epsilon(1e-12));
  }
  // The target takes one primitive step (into the wall) rather than an identity row.
  CHECK(macro.reward()[9] == -1);
}

TEST_CASE("option that terminates everywhere yields one primitive step per state") {
  const auto mdp = fixture::exit_corridor(4);
  const auto agg = identity_aggregation(5, Index(4));
  OptionPolicy opt{{1, 0, 1, 0, 0}, TerminationVector{{1, 1, 1, 1, 1}}};
  const auto m = finalize_macro(upscale_one_step(opt, mdp, agg), opt, mdp, agg);
  for (Index i = 0; i < 5; ++i) {
    const auto& a = mdp.action(opt.mu[std::size_t(i)]);
    CHECK(m.reward()[i] == a.reward()[i]);
    for (Index j = 0; j < 5; ++j) CHECK(m.row(i).coeff(j) == a.row(i).coeff(j));
  }
  opt.mu[0] = 7;
  CHECK_THROWS_AS(upscale_one_step(opt, mdp, agg), std::invalid_argument);
}

TEST_CASE("Taxi depot options follow shortest grid paths") {
  const auto taxi = build_taxi();
  const oracle::TaxiSim sim{taxi.params};
  const auto small = compress_mdp(taxi.mdp, taxi.position);
  static const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, 1, -1};
  for (std::size_t q = 0; q < 4; ++q) {
    const auto& g = taxi.subgoals[q];
    const auto [m, rep] = subgoal_vi(small, g);
    const auto opt = extract_option(m, g, small.actions());
    const Cell target = taxi.params.depots[q];
    const auto dist = oracle::grid_distances(sim, target);
    for (Index x = 0; x < 25; ++x) {
      const bool at_target = x == target.row * 5 + target.col;
      CHECK(bool(opt.beta[x]) == at_target);
      if (at_target) continue;
      const auto a = opt.mu[std::size_t(x)];
      REQUIRE(a < 4);
      const int r = int(x) / 5 + dr[a], c = int(x) % 5 + dc[a];
      CHECK(dist[std::size_t(r * 5 + c)] == dist[std::size_t(x)] - 1);
    }
    CHECK(opt.beta[25]);
  }
}

TEST_CASE("identity aggregation reduces build_macro to full-space subgoal VI") {
  const auto check = [](const MdpD& mdp, const SubgoalD& g, const Aggregation& id) {
    SolveOptions o;
    o.eps = 1e-12;
    MacroOptions mo;
    mo.solve = o;
    const auto macro = build_macro(mdp, id, g, mo);
    const auto [m, rep] = subgoal_vi(mdp, g, {}, o);
    CHECK(max_abs_diff(macro, m) < 1e-9);
  };
  const auto corridor = fixture::walled_corridor(10, 0.95);
  check(corridor, make_subgoal<double>("end", 10, {9}, default_subgoal_magnitude(corridor)), identity_aggregation(10));

  const auto h = build_hanoi({3, 0.0});
  const HanoiCodec codec(3);
  const Index n = h.mdp.size();
  for (int peg = 1; peg <= 3; ++peg) {
    const Index target = codec.encode({peg, peg, peg});
    check(h.mdp, make_subgoal<double>("peg", n, {target}, default_subgoal_magnitude(h.mdp)),
          identity_aggregation(n, h.mdp.sink()));
  }
}

TEST_CASE("initiation mask marks the states where the option continues") {
  OptionPolicy opt{{0, 0, 0}, TerminationVector{{0, 1, 0}}};
  const auto agg = build_hard_aggregation(4, {0, 1, 2, 1}, std::nullopt);
  CHECK(option_initiation_mask(opt, agg) == std::vector<std::uint8_t>{1, 0, 1, 0});
}

TEST_CASE("upscale_value copies aggregate values") {
  const auto agg = build_hard_aggregation(4, {1, 0, 1, 2}, std::nullopt);
  VectorX<double> v(3);
  v << 7, 8, 9;
  const auto up = upscale_value(ValueD(v), agg);
  CHECK(up.values() == (VectorX<double>(4) << 8, 7, 8, 9).finished());
  CHECK_THROWS_AS(upscale_value(ValueD(2), agg), DimensionError);
}
