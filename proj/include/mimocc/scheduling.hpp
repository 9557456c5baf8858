#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimocc/model.hpp"

namespace mimocc {

// Sorted user subset of size t+1; labels the XOR codeword X_T serving exactly
// those users.
using CodewordIndex = std::vector<int>;

struct BaseParams {
  int beta0 = 0;      // (t+1)/gcd(t+1, omega): per-superset user multiplicity
  int B0 = 0;         // omega/gcd(t+1, omega): codewords per superset
  long long S0 = 0;   // C(omega, t+1)/B0: number of supersets
};

// Partition of all size-(t+1) subsets of the target set into S0 supersets of
// B0 codewords each, every user appearing exactly beta0 times per superset.
struct BaseSchedule {
  int omega = 0;
  int t = 0;
  std::vector<int> users;  // sorted target set, |users| = omega
  std::vector<std::vector<CodewordIndex>> supersets;  // S0 x B0
};

// One codeword occurrence in an extended schedule; `copy` is the tag that
// distinguishes repeated occurrences of the same index.
struct TaggedCodeword {
  CodewordIndex index;
  int copy = 1;

  friend bool operator==(const TaggedCodeword&, const TaggedCodeword&) = default;
};

struct ExtendedSchedule {
  int eta = 0;
  int delta = 0;
  BaseSchedule base;
  // delta*S0/eta transmissions of B0*eta tagged codewords each.
  std::vector<std::vector<TaggedCodeword>> transmissions;
  // Subpacket bookkeeping, parallel to `transmissions`: for transmission i,
  // entry j, member position m (sorted order within the codeword index), the
  // delivered subpacket is W_{T\{k},k}^q with q = member_subs[i][j][m]. The
  // counter q runs per (packet index, user) across the whole schedule, so no
  // subpacket repeats.
  std::vector<std::vector<std::vector<int>>> member_subs;
};

struct FeasibleBeta {
  int beta = 0;   // eta * beta0
  int eta = 0;
  int delta = 0;  // smallest delta with delta*S0/eta integer
};

BaseParams base_params(int omega, int t);

// Constructs a valid base partition. Deterministic for a given (users, t,
// seed); the seed only steers the randomized fallback search.
BaseSchedule base_schedule(const std::vector<int>& users, int t,
                           std::uint64_t seed = 1);

// All linearly decodable stream counts for (omega, t, L, G), ascending:
// beta = eta*beta0 with eta <= min(floor(L*S0/(1+(omega-t-1)*beta0*S0)),
// floor(G/beta0)). May be empty.
std::vector<FeasibleBeta> feasible_betas(int omega, int t, int L, int G);

// Concatenates delta copies of the B0 x S0 base table column-wise, tags
// repeated codeword indices in column order, and slices into width-eta
// tables. Requires delta*S0 divisible by eta.
ExtendedSchedule extended_schedule(const BaseSchedule& base, int eta,
                                   int delta);

// Line-oriented text forms used by golden-file tests: one transmission (or
// superset) per line; codewords as comma-joined user lists separated by
// spaces; extended entries carry a ":copy" suffix.
std::string to_text(const BaseSchedule& schedule);
std::string to_text(const ExtendedSchedule& schedule);

}  // namespace mimocc
