#pragma once

#include <vector>

#include "mimocc/errors.hpp"

namespace mimocc {

struct RatePoint {
  double snr_db = 0;
  double r_sym = 0;                  // files per second
  double per_transmission_rate = 0;  // bits per channel use
  double sum_rate = 0;               // bits per channel use over all streams
  long long theta = 1;
  long long transmissions_per_round = 1;
};

// R_sym = K / T_total with T_total = sum over transmissions of 1/(theta*R_i).
// Returns 0 when any transmission rate is 0.
double symmetric_rate(const std::vector<double>& per_transmission_rates,
                      long long theta, int K);

// Least-squares slope of sum rate against log2(SNR) over the points at
// 40 dB or above; the slope estimates the DoF.
double dof_slope(const std::vector<RatePoint>& curve);

}  // namespace mimocc
