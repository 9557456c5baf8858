#pragma once

#include <vector>

#include "mimocc/combinatorics.hpp"
#include "mimocc/errors.hpp"

namespace mimocc {

// A cache-aided MIMO network instance. Users, files and packets are 1-based;
// user k requests file k (all-distinct worst-case demands). File size is
// normalized to one data unit.
struct NetworkConfig {
  int K = 0;       // user count
  int L = 0;       // transmit spatial dimensions
  int G = 0;       // receive spatial dimensions per user
  int t = 0;       // coded-caching gain, t = K*M/N
  int N = 0;       // library size in files
  int M = 0;       // per-user cache size in files
  double P_T = 1;  // transmit power budget, linear
  double N0 = 1;   // noise variance, linear
};

// Sorted user subset of size t labelling a cached packet W_P.
using PacketIndex = std::vector<int>;

// One delivery-phase subpacket of the file requested by `user`: the q-th
// piece of packet `packet` (user is never a member of its own packet index).
struct SubpacketId {
  int user = 0;
  PacketIndex packet;
  int sub = 0;  // q >= 1

  friend bool operator==(const SubpacketId&, const SubpacketId&) = default;
  friend auto operator<=>(const SubpacketId& a, const SubpacketId& b) {
    if (auto c = a.user <=> b.user; c != 0) return c;
    if (auto c = a.packet <=> b.packet; c != 0) return c;
    return a.sub <=> b.sub;
  }
};

enum class DeliveryScheme { unicast, multicast };

struct SubpacketizationReport {
  long long placement_splits = 0;  // C(K,t)
  long long delivery_splits = 0;   // scheme-dependent
  long long theta = 0;             // total splits per file
};

// Validates the (K, L, G, t, N, M, P_T, N0) tuple.
NetworkConfig make_config(int K, int L, int G, int t, int N, int M, double P_T,
                          double N0);

// All C(K,t) size-t subsets of [K], lexicographic.
std::vector<PacketIndex> packet_indices(int K, int t);

// Packet indices stored by user k: every P with k in P (per file).
std::vector<PacketIndex> cache_contents(const NetworkConfig& config, int k);

// Subpacketization accounting for a delivery scheme at (omega, beta, delta).
// Unicast splits each requested packet into beta*C(K-t-1, omega-t-1) pieces;
// multicast into delta*C(K-t-1, omega-t-1).
SubpacketizationReport subpacketization(const NetworkConfig& config,
                                        DeliveryScheme scheme, int omega,
                                        int beta = 1, int delta = 1);

}  // namespace mimocc
