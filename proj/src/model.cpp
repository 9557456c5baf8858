#include "mimocc/model.hpp"

#include <algorithm>

namespace mimocc {

NetworkConfig make_config(int K, int L, int G, int t, int N, int M, double P_T,
                          double N0) {
  if (K < 1 || L < 1 || G < 1 || N < 1 || M < 0 || t < 0) {
    throw Error(Errc::invalid_argument,
                "K, L, G, N must be >= 1; M, t must be >= 0");
  }
  if (P_T <= 0) throw Error(Errc::non_positive, "P_T must be > 0");
  if (N0 <= 0) throw Error(Errc::non_positive, "N0 must be > 0");
  if (static_cast<long long>(K) * M != static_cast<long long>(t) * N) {
    throw Error(Errc::integer_gain_violation,
                "t must equal K*M/N exactly (got K*M=" +
                    std::to_string(static_cast<long long>(K) * M) +
                    ", t*N=" + std::to_string(static_cast<long long>(t) * N) +
                    ")");
  }
  if (K < t + 1) {
    throw Error(Errc::too_few_users, "K must be at least t+1");
  }
  return NetworkConfig{K, L, G, t, N, M, P_T, N0};
}

std::vector<PacketIndex> packet_indices(int K, int t) {
  if (t < 0 || t > K) {
    throw Error(Errc::invalid_argument, "need 0 <= t <= K");
  }
  return subsets_of_size(iota_users(K), t);
}

std::vector<PacketIndex> cache_contents(const NetworkConfig& config, int k) {
  if (k < 1 || k > config.K) {
    throw Error(Errc::unknown_user, "user " + std::to_string(k));
  }
  std::vector<PacketIndex> out;
  for (auto& p : packet_indices(config.K, config.t)) {
    if (std::binary_search(p.begin(), p.end(), k)) out.push_back(p);
  }
  return out;
}

SubpacketizationReport subpacketization(const NetworkConfig& config,
                                        DeliveryScheme scheme, int omega,
                                        int beta, int delta) {
  if (omega < config.t + 1 || omega > config.K) {
    throw Error(Errc::bad_omega, "need t+1 <= omega <= K");
  }
  if (beta < 1 || delta < 1) {
    throw Error(Errc::invalid_argument, "beta and delta must be >= 1");
  }
  SubpacketizationReport report;
  report.placement_splits = binomial(config.K, config.t);
  const long long base = binomial(config.K - config.t - 1, omega - config.t - 1);
  report.delivery_splits =
      (scheme == DeliveryScheme::unicast ? beta : delta) * base;
  report.theta = report.placement_splits * report.delivery_splits;
  return report;
}

}  // namespace mimocc
