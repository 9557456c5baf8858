#include <doctest.h>

#include "mimocc/model.hpp"

using namespace mimocc;

TEST_CASE("make_config accepts the working points") {
  const auto a = make_config(10, 6, 4, 1, 10, 1, 1.0, 1.0);
  CHECK(a.K == 10);
  CHECK(a.t == 1);
  const auto b = make_config(3, 3, 2, 1, 3, 1, 1.0, 1.0);
  CHECK(b.L == 3);
}

TEST_CASE("make_config rejects invalid tuples") {
  CHECK_THROWS_WITH_AS(make_config(3, 3, 2, 2, 3, 1, 1.0, 1.0),
                       doctest::Contains("IntegerGainViolation"), Error);
  CHECK_THROWS_AS(make_config(2, 3, 2, 2, 2, 2, 1.0, 1.0), Error);  // K < t+1
  try {
    make_config(2, 3, 2, 2, 2, 2, 1.0, 1.0);
  } catch (const Error& err) {
    CHECK(err.code() == Errc::too_few_users);
  }
  try {
    make_config(3, 3, 2, 1, 3, 1, 0.0, 1.0);
  } catch (const Error& err) {
    CHECK(err.code() == Errc::non_positive);
  }
  try {
    make_config(3, 3, 2, 1, 3, 1, 1.0, -2.0);
  } catch (const Error& err) {
    CHECK(err.code() == Errc::non_positive);
  }
}

TEST_CASE("packet_indices enumerates lexicographically") {
  const auto singles = packet_indices(3, 1);
  REQUIRE(singles.size() == 3);
  CHECK(singles[0] == PacketIndex{1});
  CHECK(singles[2] == PacketIndex{3});

  const auto pairs = packet_indices(4, 2);
  REQUIRE(pairs.size() == 6);
  CHECK(pairs.front() == PacketIndex{1, 2});
  CHECK(pairs.back() == PacketIndex{3, 4});

  const auto none = packet_indices(5, 0);
  REQUIRE(none.size() == 1);
  CHECK(none[0].empty());
}

TEST_CASE("cache_contents per user") {
  const auto cfg3 = make_config(3, 3, 2, 1, 3, 1, 1.0, 1.0);
  const auto user1 = cache_contents(cfg3, 1);
  REQUIRE(user1.size() == 1);
  CHECK(user1[0] == PacketIndex{1});

  const auto cfg4 = make_config(4, 3, 2, 2, 4, 2, 1.0, 1.0);
  const auto pairs = cache_contents(cfg4, 1);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == PacketIndex{1, 2});
  CHECK(pairs[1] == PacketIndex{1, 3});
  CHECK(pairs[2] == PacketIndex{1, 4});

  const auto cfg0 = make_config(4, 3, 2, 0, 4, 0, 1.0, 1.0);
  CHECK(cache_contents(cfg0, 2).empty());

  CHECK_THROWS_AS(cache_contents(cfg3, 4), Error);
}

TEST_CASE("placement counting invariants") {
  for (int K = 2; K <= 7; ++K) {
    for (int t = 0; t < K; ++t) {
      const auto cfg = make_config(K, 2, 2, t, K, t, 1.0, 1.0);
      long long total = 0;
      std::vector<int> appearances(binomial(K, t), 0);
      const auto all = packet_indices(K, t);
      for (int k = 1; k <= K; ++k) {
        const auto cache = cache_contents(cfg, k);
        CHECK(static_cast<long long>(cache.size()) == binomial(K - 1, t - 1));
        total += static_cast<long long>(cache.size());
        for (const auto& p : cache) {
          const auto it = std::find(all.begin(), all.end(), p);
          REQUIRE(it != all.end());
          ++appearances[it - all.begin()];
        }
      }
      CHECK(total == static_cast<long long>(t) * binomial(K, t));
      for (int count : appearances) CHECK(count == t);
    }
  }
}

TEST_CASE("subpacketization accounting") {
  const auto cfg = make_config(10, 6, 4, 1, 10, 1, 1.0, 1.0);

  const auto uc = subpacketization(cfg, DeliveryScheme::unicast, 3, 4, 1);
  CHECK(uc.placement_splits == 10);
  CHECK(uc.delivery_splits == 4 * binomial(8, 1));
  CHECK(uc.delivery_splits == 32);
  CHECK(uc.theta == 320);

  const auto mc = subpacketization(cfg, DeliveryScheme::multicast, 4, 1, 1);
  CHECK(mc.delivery_splits == binomial(8, 2));
  CHECK(mc.delivery_splits == 28);

  const auto full = subpacketization(cfg, DeliveryScheme::unicast, 10, 1, 1);
  CHECK(full.delivery_splits == 1);

  CHECK_THROWS_AS(subpacketization(cfg, DeliveryScheme::unicast, 1, 1, 1),
                  Error);
  CHECK_THROWS_AS(subpacketization(cfg, DeliveryScheme::unicast, 11, 1, 1),
                  Error);
}

TEST_CASE("subpacketization is multiplicative in delta") {
  const auto cfg = make_config(8, 4, 2, 2, 8, 2, 1.0, 1.0);
  for (int omega = 3; omega <= 8; ++omega) {
    const auto base =
        subpacketization(cfg, DeliveryScheme::multicast, omega, 1, 1);
    for (int d = 2; d <= 5; ++d) {
      const auto scaled =
          subpacketization(cfg, DeliveryScheme::multicast, omega, 1, d);
      CHECK(scaled.theta == d * base.theta);
    }
  }
}
