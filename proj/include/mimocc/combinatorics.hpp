#pragma once

#include <cstdint>
#include <vector>

namespace mimocc {

// Exact binomial coefficient; returns 0 for k < 0 or k > n. Values used in
// this library stay far below 2^63 (desk-scale K <= ~40).
long long binomial(int n, int k);

// All size-r subsets of `universe` in lexicographic order (universe order is
// preserved, so a sorted universe yields sorted subsets).
std::vector<std::vector<int>> subsets_of_size(const std::vector<int>& universe,
                                              int r);

// 1..n as a vector, the canonical user set.
std::vector<int> iota_users(int n);

long long gcd_ll(long long a, long long b);

}  // namespace mimocc
