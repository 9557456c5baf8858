#include "mimocc/rate.hpp"

#include <cmath>

namespace mimocc {

double symmetric_rate(const std::vector<double>& per_transmission_rates,
                      long long theta, int K) {
  if (theta < 1) throw Error(Errc::invalid_argument, "theta must be >= 1");
  if (per_transmission_rates.empty())
    throw Error(Errc::invalid_argument, "no transmissions");
  double total_time = 0;
  for (double rate : per_transmission_rates) {
    if (rate < 0)
      throw Error(Errc::invalid_argument, "negative transmission rate");
    if (rate == 0) return 0;
    total_time += 1.0 / (static_cast<double>(theta) * rate);
  }
  return static_cast<double>(K) / total_time;
}

double dof_slope(const std::vector<RatePoint>& curve) {
  std::vector<double> x, y;
  for (const auto& point : curve) {
    if (point.snr_db < 40.0) continue;
    x.push_back(std::log2(std::pow(10.0, point.snr_db / 10.0)));
    y.push_back(point.sum_rate);
  }
  if (x.size() < 2)
    throw Error(Errc::insufficient_points,
                "need at least two points at >= 40 dB");
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace mimocc
