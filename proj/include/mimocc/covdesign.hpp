#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mimocc/beamform.hpp"
#include "mimocc/channel.hpp"

namespace mimocc {

// Per-message L x L Hermitian PSD transmit covariances, aligned with the
// message (stream) set the design was run on.
struct CovarianceSet {
  std::vector<std::string> labels;
  std::vector<Eigen::MatrixXcd> K;

  double total_trace() const;
};

// The multiple-access structure seen by one user: its intended messages, all
// nonempty subsets of them (every subset carries a sum-rate constraint), and
// the messages it can neither decode nor cancel.
struct MacRegion {
  int user = 0;
  std::vector<int> intended;
  std::vector<int> interference;
  std::vector<std::vector<int>> subsets;  // of `intended`, bitmask order
};

// One message per codeword index in S^K = {T subset of users, |T| = t+1}.
StreamSet multicast_messages(const std::vector<int>& users, int t);

// MAC region of user k for an arbitrary message set.
MacRegion mac_region_for(const StreamSet& messages, int k);
// MAC region of user k under full multicast transmission to `users`.
MacRegion mac_region(const std::vector<int>& users, int t, int k);

struct CovDesignOptions {
  double tol = 1e-5;
  int max_iter = 200;
  int inner_max = 400;  // ascent iterations per annealing stage
  // Optional warm start, one PSD matrix per message; default is
  // P_T/(n_messages*L) times the identity.
  std::vector<Eigen::MatrixXcd> initial;
};

struct CovDesignResult {
  CovarianceSet covariances;
  double R = 0;  // achieved max-min per-message rate, bits per channel use
  bool converged = false;
  std::vector<double> trace;  // exact objective per SCA iteration
};

// One SCA step: solves the convexified subproblem (log-det terms kept, the
// interference log-det replaced by its tangent at `current`) with a smoothed
// projected first-order method, and returns the new point with its exact
// objective. Never returns a point worse than `current`.
std::pair<CovarianceSet, double> sca_cov_step(const ChannelSet& channels,
                                              const StreamSet& messages,
                                              const CovarianceSet& current,
                                              double P_T, double N0,
                                              int inner_max = 400);

// Full SCA loop for an arbitrary message set.
CovDesignResult optimize_covariances_for(const ChannelSet& channels,
                                         const StreamSet& messages, double P_T,
                                         double N0,
                                         const CovDesignOptions& opts = {});

// Full multicast covariance design over the target set.
CovDesignResult optimize_covariances(const ChannelSet& channels,
                                     const std::vector<int>& users, int t,
                                     double P_T, double N0,
                                     const CovDesignOptions& opts = {});

// Brute-force re-evaluation of every (user, subset) log-det constraint plus
// the power budget at the given covariances and claimed symmetric rate R
// (every message carries rate R).
bool verify_mac_feasibility(const ChannelSet& channels,
                            const StreamSet& messages,
                            const std::vector<Eigen::MatrixXcd>& K, double R,
                            double P_T, double N0, double slack = 1e-6);
// Same with per-message rates.
bool verify_mac_feasibility(const ChannelSet& channels,
                            const StreamSet& messages,
                            const std::vector<Eigen::MatrixXcd>& K,
                            const std::vector<double>& rates, double P_T,
                            double N0, double slack = 1e-6);

// Hermitian lower-triangle text serialization for regression tests.
std::string to_text(const CovarianceSet& set);
CovarianceSet covariances_from_text(const std::string& text);

}  // namespace mimocc
