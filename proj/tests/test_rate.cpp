#include <doctest.h>

#include <cmath>

#include "mimocc/rate.hpp"

using namespace mimocc;

TEST_CASE("symmetric_rate definition") {
  // Equal rates collapse to K*theta*R/n.
  CHECK(symmetric_rate(std::vector<double>(4, 2.5), 8, 10) ==
        doctest::Approx(10.0 * 8 * 2.5 / 4));
  CHECK(symmetric_rate({1.0}, 1, 1) == doctest::Approx(1.0));
  // Direct evaluation of the reciprocal sum.
  const std::vector<double> rates = {1.0, 2.0, 4.0};
  const double t_total = 1.0 / 3 + 1.0 / 6 + 1.0 / 12;
  CHECK(symmetric_rate(rates, 3, 5) == doctest::Approx(5.0 / t_total));
  CHECK(symmetric_rate({1.0, 0.0, 2.0}, 3, 5) == 0.0);
}

TEST_CASE("symmetric_rate monotonicity and homogeneity") {
  const std::vector<double> rates = {0.5, 1.5, 2.5, 0.75};
  const double base = symmetric_rate(rates, 4, 7);
  for (size_t i = 0; i < rates.size(); ++i) {
    auto bumped = rates;
    bumped[i] += 0.25;
    CHECK(symmetric_rate(bumped, 4, 7) >= base);
  }
  for (double c : {0.5, 2.0, 7.5}) {
    auto scaled = rates;
    for (auto& r : scaled) r *= c;
    CHECK(symmetric_rate(scaled, 4, 7) == doctest::Approx(c * base));
  }
}

TEST_CASE("dof_slope recovers exact lines") {
  auto line = [](double a) {
    std::vector<RatePoint> curve;
    for (double snr : {40.0, 45.0, 50.0, 55.0, 60.0}) {
      RatePoint point;
      point.snr_db = snr;
      point.sum_rate = a * std::log2(std::pow(10.0, snr / 10.0)) + 3.0;
      curve.push_back(point);
    }
    return curve;
  };
  CHECK(dof_slope(line(6.0)) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(dof_slope(line(0.0)) == doctest::Approx(0.0));

  // Points below 40 dB are ignored.
  auto curve = line(4.0);
  RatePoint low;
  low.snr_db = 10.0;
  low.sum_rate = 1e6;
  curve.push_back(low);
  CHECK(dof_slope(curve) == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(dof_slope({low}), Error);
  std::vector<RatePoint> single = {line(2.0)[0]};
  CHECK_THROWS_AS(dof_slope(single), Error);
}
