#include "mimocc/dofopt.hpp"

#include <algorithm>

namespace mimocc {

int beta_max(int omega, int t, int L, int G) {
  if (omega < t + 1) throw Error(Errc::bad_omega, "need omega >= t+1");
  if (L < 1 || G < 1) throw Error(Errc::invalid_argument, "need L, G >= 1");
  const long long s = binomial(omega - 1, t);
  const long long bound = (L * s) / (1 + (omega - t - 1) * s);
  return static_cast<int>(std::min<long long>(G, bound));
}

DofSolution dof_max(const NetworkConfig& config) {
  DofSolution solution;
  for (int omega = config.t + 1; omega <= config.K; ++omega) {
    const int beta = beta_max(omega, config.t, config.L, config.G);
    solution.frontier.push_back(
        {omega, beta, static_cast<long long>(omega) * beta});
  }
  const FrontierPoint* best = nullptr;
  for (const auto& point : solution.frontier) {
    if (point.beta == 0) continue;
    if (!best || point.dof > best->dof ||
        (point.dof == best->dof && point.beta < best->beta)) {
      best = &point;  // smallest beta among ties; scan order gives smallest omega
    }
  }
  if (!best) {
    throw Error(Errc::no_feasible_point, "beta_max is 0 for every omega");
  }
  solution.omega_star = best->omega;
  solution.beta_star = best->beta;
  solution.dof = best->dof;
  return solution;
}

std::optional<long long> dof_reference_gtl(int L, int G, int t) {
  if (L % G != 0) return std::nullopt;
  return static_cast<long long>(G) * t + L;
}

}  // namespace mimocc
