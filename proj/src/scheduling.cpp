#include "mimocc/scheduling.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace mimocc {
namespace {

std::uint64_t splitmix_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Canonical construction works on users 0..omega-1; codewords as sorted
// int vectors over that range.
using Canon = std::vector<std::vector<std::vector<int>>>;  // supersets

// t = 1, even omega: circle-method round robin. Round r pairs the fixed user
// omega-1 with r and wraps the remaining users around the circle.
Canon round_robin_even(int omega) {
  const int n = omega - 1;
  Canon supersets;
  for (int r = 0; r < n; ++r) {
    std::vector<std::vector<int>> round;
    round.push_back({omega - 1, r});
    for (int i = 1; i <= omega / 2 - 1; ++i) {
      round.push_back({(r + i) % n, (r - i + n) % n});
    }
    supersets.push_back(std::move(round));
  }
  return supersets;
}

// gcd(omega, t+1) = 1: every rotation orbit of a size-(t+1) subset under
// i -> i+1 (mod omega) has full length omega, and across one orbit each user
// appears exactly t+1 = beta0 times. The orbits therefore are the supersets.
Canon cyclic_orbits(int omega, int t) {
  auto all = subsets_of_size(iota_users(omega), t + 1);
  for (auto& c : all)
    for (auto& u : c) --u;  // 0-based
  std::map<std::vector<int>, bool> used;
  for (auto& c : all) used[c] = false;
  Canon supersets;
  for (auto& c : all) {
    if (used[c]) continue;
    std::vector<std::vector<int>> orbit;
    for (int j = 0; j < omega; ++j) {
      std::vector<int> rotated(c.size());
      for (size_t i = 0; i < c.size(); ++i) rotated[i] = (c[i] + j) % omega;
      std::sort(rotated.begin(), rotated.end());
      used[rotated] = true;
      orbit.push_back(std::move(rotated));
    }
    supersets.push_back(std::move(orbit));
  }
  return supersets;
}

// (t+1) | omega: each superset is a perfect partition of the user set.
// Depth-first search over rounds; within a round, exact cover driven by the
// lowest uncovered user. Restarts reshuffle codeword preference.
struct MatchingSearch {
  int omega, t, B0;
  long long S0;
  std::vector<std::vector<int>> codewords;          // lex order, 0-based users
  std::vector<std::vector<int>> containing;         // per user: codeword ids
  std::vector<char> used;
  std::vector<std::vector<int>> perm_rank;          // restart-specific order
  long long nodes = 0, budget = 0;
  Canon result;

  bool solve_round(int round, int covered_mask_popcount,
                   std::vector<char>& covered,
                   std::vector<int>& current) {
    if (++nodes > budget) return false;
    if (covered_mask_popcount == omega) {
      result.emplace_back();
      for (int id : current) result.back().push_back(codewords[id]);
      if (round + 1 == S0) return true;
      std::vector<int> next;
      std::vector<char> fresh(omega, 0);
      if (solve_round(round + 1, 0, fresh, next)) return true;
      result.pop_back();
      return false;
    }
    int pivot = 0;
    while (covered[pivot]) ++pivot;
    std::vector<int> candidates;
    for (int id : containing[pivot]) {
      if (used[id]) continue;
      bool ok = true;
      for (int u : codewords[id])
        if (covered[u]) { ok = false; break; }
      if (ok) candidates.push_back(id);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      return perm_rank[pivot][a] < perm_rank[pivot][b];
    });
    for (int id : candidates) {
      used[id] = 1;
      for (int u : codewords[id]) covered[u] = 1;
      current.push_back(id);
      if (solve_round(round, covered_mask_popcount + t + 1, covered, current))
        return true;
      current.pop_back();
      for (int u : codewords[id]) covered[u] = 0;
      used[id] = 0;
      if (nodes > budget) return false;
    }
    return false;
  }
};

Canon matching_rounds(int omega, int t, long long S0, int B0,
                      std::uint64_t seed) {
  MatchingSearch search;
  search.omega = omega;
  search.t = t;
  search.B0 = B0;
  search.S0 = S0;
  search.codewords = subsets_of_size(iota_users(omega), t + 1);
  for (auto& c : search.codewords)
    for (auto& u : c) --u;
  const int m = static_cast<int>(search.codewords.size());
  search.containing.assign(omega, {});
  for (int id = 0; id < m; ++id)
    for (int u : search.codewords[id]) search.containing[u].push_back(id);

  std::uint64_t rng = seed ^ 0xA5A5A5A5DEADBEEFULL;
  const int max_restarts = 64;
  for (int restart = 0; restart < max_restarts; ++restart) {
    search.used.assign(m, 0);
    search.nodes = 0;
    search.budget = 1000000 / max_restarts + 1;
    search.result.clear();
    search.perm_rank.assign(omega, std::vector<int>(m));
    for (int u = 0; u < omega; ++u) {
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      if (restart > 0) {
        for (int i = m - 1; i > 0; --i) {
          int j = static_cast<int>(splitmix_next(rng) % (i + 1));
          std::swap(order[i], order[j]);
        }
      }
      for (int rank = 0; rank < m; ++rank) search.perm_rank[u][order[rank]] = rank;
    }
    std::vector<char> covered(omega, 0);
    std::vector<int> current;
    if (search.solve_round(0, 0, covered, current)) return search.result;
  }
  throw Error(Errc::search_exhausted,
              "matching-per-round search budget exceeded for omega=" +
                  std::to_string(omega) + ", t=" + std::to_string(t));
}

// General fallback: assign lex-ordered codewords to supersets under the
// per-superset size (B0) and per-user multiplicity (beta0) caps. Superset
// permutation symmetry is broken by allowing at most one empty superset as a
// candidate. Restarts reshuffle the candidate order.
struct AssignSearch {
  int omega, beta0, B0;
  int S0;
  std::vector<std::vector<int>> codewords;
  std::vector<int> size_of;                 // per superset
  std::vector<std::vector<int>> user_count; // [superset][user]
  std::vector<int> assignment;              // codeword -> superset
  long long nodes = 0, budget = 0;
  std::uint64_t rng = 0;
  bool shuffle = false;

  bool feasible(int s, const std::vector<int>& cw) const {
    if (size_of[s] >= B0) return false;
    for (int u : cw)
      if (user_count[s][u] >= beta0) return false;
    return true;
  }

  bool dfs(int i, int used_supersets) {
    if (++nodes > budget) return false;
    if (i == static_cast<int>(codewords.size())) return true;
    const auto& cw = codewords[i];
    std::vector<int> candidates;
    for (int s = 0; s < std::min(used_supersets + 1, S0); ++s) {
      if (feasible(s, cw)) candidates.push_back(s);
    }
    if (shuffle) {
      for (int a = static_cast<int>(candidates.size()) - 1; a > 0; --a) {
        int b = static_cast<int>(splitmix_next(rng) % (a + 1));
        std::swap(candidates[a], candidates[b]);
      }
    }
    for (int s : candidates) {
      assignment[i] = s;
      ++size_of[s];
      for (int u : cw) ++user_count[s][u];
      if (dfs(i + 1, std::max(used_supersets, s + 1))) return true;
      --size_of[s];
      for (int u : cw) --user_count[s][u];
      if (nodes > budget) return false;
    }
    return false;
  }
};

Canon general_assignment(int omega, int t, int beta0, int B0, long long S0,
                         std::uint64_t seed) {
  AssignSearch search;
  search.omega = omega;
  search.beta0 = beta0;
  search.B0 = B0;
  search.S0 = static_cast<int>(S0);
  search.codewords = subsets_of_size(iota_users(omega), t + 1);
  for (auto& c : search.codewords)
    for (auto& u : c) --u;
  const int m = static_cast<int>(search.codewords.size());
  search.rng = seed ^ 0xC0FFEE123456789ULL;

  const int max_restarts = 64;
  for (int restart = 0; restart < max_restarts; ++restart) {
    search.size_of.assign(search.S0, 0);
    search.user_count.assign(search.S0, std::vector<int>(omega, 0));
    search.assignment.assign(m, -1);
    search.nodes = 0;
    search.budget = 1000000 / max_restarts + 1;
    search.shuffle = restart > 0;
    if (search.dfs(0, 0)) {
      Canon supersets(search.S0);
      for (int i = 0; i < m; ++i)
        supersets[search.assignment[i]].push_back(search.codewords[i]);
      return supersets;
    }
  }
  throw Error(Errc::search_exhausted,
              "codeword-to-superset search budget exceeded for omega=" +
                  std::to_string(omega) + ", t=" + std::to_string(t));
}

void canonicalize(Canon& supersets) {
  for (auto& superset : supersets) {
    for (auto& cw : superset) std::sort(cw.begin(), cw.end());
    std::sort(superset.begin(), superset.end());
  }
  std::sort(supersets.begin(), supersets.end());
}

void check_valid(const BaseSchedule& schedule, const BaseParams& params) {
  std::vector<CodewordIndex> all;
  std::map<int, int> count;
  for (const auto& superset : schedule.supersets) {
    if (static_cast<int>(superset.size()) != params.B0)
      throw Error(Errc::search_exhausted, "superset size mismatch");
    count.clear();
    for (const auto& cw : superset) {
      all.push_back(cw);
      for (int u : cw) ++count[u];
    }
    for (int u : schedule.users) {
      if (count[u] != params.beta0)
        throw Error(Errc::search_exhausted, "user multiplicity mismatch");
    }
  }
  std::sort(all.begin(), all.end());
  auto expected = subsets_of_size(schedule.users, schedule.t + 1);
  if (all != expected)
    throw Error(Errc::search_exhausted, "supersets do not partition the codeword set");
}

}  // namespace

BaseParams base_params(int omega, int t) {
  if (t < 0 || omega < t + 1)
    throw Error(Errc::bad_omega, "need omega >= t+1 >= 1");
  const long long g = gcd_ll(t + 1, omega);
  BaseParams params;
  params.beta0 = static_cast<int>((t + 1) / g);
  params.B0 = static_cast<int>(omega / g);
  params.S0 = binomial(omega, t + 1) / params.B0;
  return params;
}

BaseSchedule base_schedule(const std::vector<int>& users, int t,
                           std::uint64_t seed) {
  std::vector<int> sorted_users = users;
  std::sort(sorted_users.begin(), sorted_users.end());
  const int omega = static_cast<int>(sorted_users.size());
  const BaseParams params = base_params(omega, t);

  Canon canon;
  if (params.S0 == 1) {
    canon.push_back(subsets_of_size(iota_users(omega), t + 1));
    for (auto& cw : canon.back())
      for (auto& u : cw) --u;
  } else if (gcd_ll(omega, t + 1) == 1) {
    canon = cyclic_orbits(omega, t);
  } else if (t == 1 && omega % 2 == 0) {
    canon = round_robin_even(omega);
  } else if (omega % (t + 1) == 0) {
    canon = matching_rounds(omega, t, params.S0, params.B0, seed);
  } else {
    canon = general_assignment(omega, t, params.beta0, params.B0, params.S0,
                               seed);
  }
  canonicalize(canon);

  BaseSchedule schedule;
  schedule.omega = omega;
  schedule.t = t;
  schedule.users = sorted_users;
  for (auto& superset : canon) {
    schedule.supersets.emplace_back();
    for (auto& cw : superset) {
      CodewordIndex mapped(cw.size());
      for (size_t i = 0; i < cw.size(); ++i) mapped[i] = sorted_users[cw[i]];
      schedule.supersets.back().push_back(std::move(mapped));
    }
  }
  check_valid(schedule, params);
  return schedule;
}

std::vector<FeasibleBeta> feasible_betas(int omega, int t, int L, int G) {
  const BaseParams params = base_params(omega, t);
  const long long decode_cap =
      (L * params.S0) / (1 + (omega - t - 1) * params.beta0 * params.S0);
  const long long antenna_cap = G / params.beta0;
  const long long cap = std::min(decode_cap, antenna_cap);
  std::vector<FeasibleBeta> out;
  for (long long eta = 1; eta <= cap; ++eta) {
    FeasibleBeta fb;
    fb.eta = static_cast<int>(eta);
    fb.beta = static_cast<int>(eta) * params.beta0;
    fb.delta = static_cast<int>(eta / gcd_ll(eta, params.S0));
    out.push_back(fb);
  }
  return out;
}

ExtendedSchedule extended_schedule(const BaseSchedule& base, int eta,
                                   int delta) {
  if (eta < 1 || delta < 1)
    throw Error(Errc::invalid_argument, "eta and delta must be >= 1");
  const long long S0 = static_cast<long long>(base.supersets.size());
  if ((delta * S0) % eta != 0)
    throw Error(Errc::indivisible_slice,
                "delta*S0 = " + std::to_string(delta * S0) +
                    " is not divisible by eta = " + std::to_string(eta));

  ExtendedSchedule ext;
  ext.eta = eta;
  ext.delta = delta;
  ext.base = base;

  std::map<CodewordIndex, int> copy_counter;
  std::map<std::pair<PacketIndex, int>, int> sub_counter;
  const long long total_cols = delta * S0;
  for (long long col = 0; col < total_cols; ++col) {
    if (col % eta == 0) {
      ext.transmissions.emplace_back();
      ext.member_subs.emplace_back();
    }
    const auto& superset = base.supersets[col % S0];
    for (const auto& cw : superset) {
      TaggedCodeword tagged{cw, ++copy_counter[cw]};
      std::vector<int> subs;
      subs.reserve(cw.size());
      for (int k : cw) {
        PacketIndex packet;
        for (int u : cw)
          if (u != k) packet.push_back(u);
        subs.push_back(++sub_counter[{packet, k}]);
      }
      ext.transmissions.back().push_back(std::move(tagged));
      ext.member_subs.back().push_back(std::move(subs));
    }
  }
  return ext;
}

std::string to_text(const BaseSchedule& schedule) {
  std::ostringstream os;
  for (const auto& superset : schedule.supersets) {
    bool first = true;
    for (const auto& cw : superset) {
      if (!first) os << ' ';
      first = false;
      for (size_t i = 0; i < cw.size(); ++i) {
        if (i) os << ',';
        os << cw[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string to_text(const ExtendedSchedule& schedule) {
  std::ostringstream os;
  for (const auto& tx : schedule.transmissions) {
    bool first = true;
    for (const auto& entry : tx) {
      if (!first) os << ' ';
      first = false;
      for (size_t i = 0; i < entry.index.size(); ++i) {
        if (i) os << ',';
        os << entry.index[i];
      }
      os << ':' << entry.copy;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace mimocc
