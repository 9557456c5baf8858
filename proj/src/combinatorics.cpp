#include "mimocc/combinatorics.hpp"

#include <numeric>

namespace mimocc {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long long result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;  // exact: product of i consecutive ints is divisible by i!
  }
  return result;
}

std::vector<std::vector<int>> subsets_of_size(const std::vector<int>& universe,
                                              int r) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(universe.size());
  if (r < 0 || r > n) return out;
  std::vector<int> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    std::vector<int> subset(r);
    for (int i = 0; i < r; ++i) subset[i] = universe[idx[i]];
    out.push_back(std::move(subset));
    int i = r - 1;
    while (i >= 0 && idx[i] == n - r + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<int> iota_users(int n) {
  std::vector<int> users(n);
  std::iota(users.begin(), users.end(), 1);
  return users;
}

long long gcd_ll(long long a, long long b) { return std::gcd(a, b); }

}  // namespace mimocc
