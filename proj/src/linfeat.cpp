#include "hvi/linfeat.hpp"

#include <limits>

namespace hvi {

namespace {

NormStep norms(int step, const VectorX<double>& reward, double trans_norm) {
  return {step, reward.cwiseAbs().maxCoeff(), trans_norm};
}

}  // namespace

DivergenceReport divergence_demo(double gamma, int steps) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("divergence_demo: gamma must lie in (0, 1)");
  if (steps < 1) throw std::invalid_argument("divergence_demo: steps must be positive");

  const auto action = counterexample_model<double>(gamma);
  const auto phi = counterexample_features<double>();
  const VectorX<double> xi = VectorX<double>::Constant(4, 0.25);
  const LinearModel<double> lin = project_model(action, phi, xi);

  DivergenceReport rep;
  rep.gamma = gamma;
  rep.rho = spectral_radius<double>(lin.F);

  LinearModel<double> power = lin;
  for (int k = 1; k <= steps; ++k) {
    const NormStep s = norms(k, power.q, power.F.cwiseAbs().maxCoeff());
    if (!std::isfinite(s.reward_norm) || !std::isfinite(s.trans_norm)) break;
    rep.projected.push_back(s);
    // Past this point the verdict cannot change and the norms would overflow.
    if (std::max(s.reward_norm, s.trans_norm) > 1e200) break;
    power = compose(power, lin);
  }
  rep.diverges = trajectory_diverges(rep.projected);

  const Aggregation pairs = build_hard_aggregation(4, {0, 0, 1, 1});
  const MatrixModel<double> compressed = compress_action(action, pairs);
  // Two aggregate states: dense composition is the same product, only cheaper.
  const LinearModel<double> small{compressed.reward(), dense_transitions(compressed)};
  LinearModel<double> agg_power = small;
  for (int k = 1; k <= steps; ++k) {
    rep.aggregated.push_back(norms(k, agg_power.q, agg_power.F.cwiseAbs().maxCoeff()));
    agg_power = compose(agg_power, small);
  }
  rep.aggregated_reward_bound = action.reward().cwiseAbs().maxCoeff() / (1.0 - gamma);
  return rep;
}

}  // namespace hvi
