#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mimocc/model.hpp"

namespace mimocc {

// One channel realization: a G x L complex matrix per user in the target set.
// Matrices depend only on (seed, user), never on the other members, so the
// same user sees the same channel in every subset evaluated under one seed.
struct ChannelSet {
  std::vector<int> users;
  std::vector<Eigen::MatrixXcd> H;  // aligned with `users`
  std::uint64_t seed = 0;

  const Eigen::MatrixXcd& of(int user) const;
  int index_of(int user) const;
};

// Entries i.i.d. circularly-symmetric complex Gaussian CN(0,1), drawn from
// the counter-based stream documented in rng.hpp: user k uses the key
// substream(mix(seed + GAMMA), k); matrix entry (g, l) consumes words
// 2*(g*L + l) and 2*(g*L + l) + 1 through the Box-Muller transform
//   h = sqrt(-ln u1) * exp(2*pi*i*u2).
ChannelSet sample_channels(const NetworkConfig& config,
                           const std::vector<int>& users, std::uint64_t seed);

double snr_linear(const NetworkConfig& config);
double snr_db_to_linear(double snr_db);
double snr_linear_to_db(double snr);

// Plain-text matrix dump/load for regression tests. Format: one header line
// "user G L seed", then G lines of L "re im" pairs per user.
std::string to_text(const ChannelSet& channels);
ChannelSet channels_from_text(const std::string& text);

}  // namespace mimocc
