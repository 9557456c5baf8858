#pragma once

#include <optional>
#include <vector>

#include "mimocc/model.hpp"

namespace mimocc {

struct FrontierPoint {
  int omega = 0;
  int beta = 0;       // beta_max(omega); 0 means no stream is decodable
  long long dof = 0;  // omega * beta
};

struct DofSolution {
  int omega_star = 0;
  int beta_star = 0;
  long long dof = 0;
  std::vector<FrontierPoint> frontier;  // one row per omega in [t+1, K]
};

// Largest number of parallel streams per user that still decode
// interference-free when serving omega users:
//   min(G, floor(L*C(omega-1,t) / (1 + (omega-t-1)*C(omega-1,t)))).
// May be 0, meaning this omega admits no stream.
int beta_max(int omega, int t, int L, int G);

// Exhaustive search of omega in [t+1, K] with beta = beta_max(omega).
// Ties broken by smallest beta, then smallest omega.
DofSolution dof_max(const NetworkConfig& config);

// Prior-art reference DoF G*t + L, applicable only when G divides L.
std::optional<long long> dof_reference_gtl(int L, int G, int t);

}  // namespace mimocc
