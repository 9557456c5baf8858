#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mimocc/channel.hpp"
#include "mimocc/scheduling.hpp"

namespace mimocc {

// ---------------------------------------------------------------------------
// Unicast delivery plan (signal-level scheme)
// ---------------------------------------------------------------------------

// For one target set of omega users: S = C(omega-1, t) transmissions, each
// carrying beta fresh subpackets per user. Subpacket q counters run per
// (packet index, user), so nothing repeats within a plan.
struct UnicastPlan {
  std::vector<int> users;
  int omega = 0;
  int t = 0;
  int beta = 0;
  int S = 0;
  // assignments[s][i] = subpackets for user users[i] in transmission s,
  // sorted by (packet index, q).
  std::vector<std::vector<std::vector<SubpacketId>>> assignments;
};

// Builds the plan: every size-t packet index from K\{k} gets beta fresh
// subpackets, and each transmission repeatedly drains the currently largest
// pool (ties to the lexicographically smallest packet index).
UnicastPlan unicast_plan(const std::vector<int>& users, int omega, int beta,
                         int t);

// ---------------------------------------------------------------------------
// Streams: the unified per-transmission abstraction used by the optimizers
// ---------------------------------------------------------------------------

struct Stream {
  std::vector<int> targets;    // users that decode this stream
  std::vector<int> cached_at;  // users that cancel it from cache content
  int group = 0;               // rate-aggregation group id
  int copy = 1;                // copy tag within the group
  std::string label;
};

struct StreamSet {
  std::vector<Stream> streams;
  int num_groups = 0;
  std::vector<std::vector<int>> groups;  // group id -> stream ids
  std::vector<std::string> group_labels;

  // Streams user k cannot cancel from cache (its interference universe).
  std::vector<int> active_for(int user) const;
};

// Multicast: one stream per tagged codeword of the given transmission; copies
// of a codeword index share a group.
StreamSet streams_from_transmission(const ExtendedSchedule& schedule,
                                    int tx_index);
// Unicast: one stream (and one group) per subpacket of transmission s, in
// user-major order.
StreamSet streams_from_unicast(const UnicastPlan& plan, int s);

// ---------------------------------------------------------------------------
// Beamformers
// ---------------------------------------------------------------------------

struct TxBeamformers {
  std::vector<Eigen::VectorXcd> w;  // one L-vector per stream, StreamSet order
  double total_power() const;
};

// Either per-user orthonormal bases (unicast ZF receivers) or per-stream
// combining vectors (MMSE receivers); only one of the two is populated.
struct RxCombiners {
  std::vector<int> users;
  std::vector<Eigen::MatrixXcd> bases;  // G x beta per user
  // per_stream[stream][target position] = combining vector of that user
  std::vector<std::vector<Eigen::VectorXcd>> per_stream;

  const Eigen::MatrixXcd& basis_of(int user) const;
};

// U_k = top-beta left singular vectors of H_k.
RxCombiners rx_bases(const ChannelSet& channels, int beta);

// ZF transmit beamformers for transmission s of a unicast plan. Each stream's
// vector lies in the null space of the stacked combined channels of the users
// that neither cache nor want it; streams sharing a (packet, user) pair get
// mutually orthonormal directions. Equal power P_T/(omega*beta) per stream.
TxBeamformers zf_tx_beamformers(const ChannelSet& channels,
                                const UnicastPlan& plan, int s,
                                const RxCombiners& rx, double P_T);

// Decode simulation of the full plan: removes cache-known terms, projects on
// U_k, inverts the beta x beta effective channel.
struct UnicastDecodeReport {
  double max_residual = 0;  // max over streams of interference/signal power
  // [s][user position][stream position]
  std::vector<std::vector<std::vector<double>>> residual;
  std::vector<std::vector<std::vector<double>>> sinr;  // post-processing SINR
};
UnicastDecodeReport unicast_decode_report(
    const ChannelSet& channels, const UnicastPlan& plan,
    const std::vector<TxBeamformers>& W, const RxCombiners& rx, double N0);
double unicast_decode_residual(const ChannelSet& channels,
                               const UnicastPlan& plan,
                               const std::vector<TxBeamformers>& W,
                               const RxCombiners& rx, double N0);

// ---------------------------------------------------------------------------
// MMSE receivers, SINR / MSE
// ---------------------------------------------------------------------------

// u_{k,s} = (H_k W_k W_k^H H_k^H + N0 I)^-1 H_k w_s over the streams user k
// cannot cancel from cache.
RxCombiners mmse_receivers(const ChannelSet& channels, const StreamSet& streams,
                           const TxBeamformers& W, double N0);

double stream_sinr(const ChannelSet& channels, const StreamSet& streams,
                   const TxBeamformers& W, const RxCombiners& rx, double N0,
                   int stream, int target_pos);
double stream_mse(const ChannelSet& channels, const StreamSet& streams,
                  const TxBeamformers& W, const RxCombiners& rx, double N0,
                  int stream, int target_pos);

// Exact rate bookkeeping at a design point: per-stream multicast rate
// min_k log2(1+gamma), per-group (codeword) sums, the max-min objective,
// and the sum over parallel streams.
struct RateBreakdown {
  std::vector<double> stream_rates;
  std::vector<double> group_rates;
  double r_common = 0;
  double sum_rate = 0;
};
RateBreakdown evaluate_rates(const ChannelSet& channels,
                             const StreamSet& streams, const TxBeamformers& W,
                             const RxCombiners& rx, double N0);

// ---------------------------------------------------------------------------
// KKT transmit update (Lagrangian-duality inner solver)
// ---------------------------------------------------------------------------

struct KktState {
  // Indexed [stream][target position].
  // v carries the combined rate duals: after each projection the total mass
  // is normalized globally, and the per-group shares play the role of the
  // active-group weights (they vanish for non-binding codewords).
  std::vector<std::vector<double>> v;       // common-rate duals, >= 0
  std::vector<std::vector<double>> lambda;  // MSE duals, >= 0
  std::vector<std::vector<double>> eps;     // current MSE values
  std::vector<std::vector<double>> t_epi;   // epigraph rate points
  std::vector<std::vector<double>> alpha_lin;  // MSE linearization slope
  std::vector<std::vector<double>> psi_lin;    // MSE linearization offset
  std::vector<double> stream_rate;  // dual-weighted per-stream rate
  std::vector<double> group_rate;   // per group
  std::vector<double> zeta;         // active-group indicator, sums to 1
  double r_common = 0;
  double mu = 0;     // power dual
  double step = 0.1; // subgradient base step; used as step/sqrt(iter)
  int iter = 0;
};

// Duals and linearization point derived from a warm-start design.
KktState kkt_init(const ChannelSet& channels, const StreamSet& streams,
                  const TxBeamformers& W, const RxCombiners& rx, double P_T,
                  double N0, double step = 0.1);

// One inner sweep at fixed receivers: closed-form beamformers from the current
// duals, then MSE, lambda, mu, a projected subgradient step on v, and the
// rate bookkeeping. Throws Diverged if the common rate turns non-finite.
std::pair<TxBeamformers, KktState> kkt_transmit_update(
    const ChannelSet& channels, const StreamSet& streams,
    const RxCombiners& rx, KktState state, double P_T, double N0);

// ---------------------------------------------------------------------------
// Alternating optimization
// ---------------------------------------------------------------------------

enum class TxSolver { kkt, generic };

struct LinearDesignOptions {
  double tol_outer = 1e-5;
  int max_outer = 200;
  double tol_inner = 1e-6;
  int max_inner = 500;
  TxSolver solver = TxSolver::kkt;
  double step = 0.1;
  // Optional warm start, one vector per stream (scaled to the power budget).
  std::vector<Eigen::VectorXcd> initial_w;
};

struct TracePoint {
  int iteration = 0;
  double r_common = 0;
  double power = 0;
};

struct LinearDesignResult {
  TxBeamformers W;
  RxCombiners U;
  std::vector<double> stream_rates;  // min_k log2(1+gamma) per stream
  std::vector<double> group_rates;   // sum over copies per codeword
  double r_common = 0;
  bool converged = false;
  std::vector<TracePoint> trace;  // nondecreasing r_common per outer iteration
};

// Alternates MMSE receivers with a transmit step (KKT inner loop by default,
// or the smoothed first-order solver used for cross-checks). The emitted
// iterate sequence is monotone: a candidate only replaces the incumbent if
// its exact objective improves.
LinearDesignResult optimize_linear(const ChannelSet& channels,
                                   const StreamSet& streams, double P_T,
                                   double N0,
                                   const LinearDesignOptions& opts = {});
LinearDesignResult optimize_linear(const ChannelSet& channels,
                                   const ExtendedSchedule& schedule,
                                   int tx_index, double P_T, double N0,
                                   const LinearDesignOptions& opts = {});

// "iteration r_common power" lines for convergence plots.
std::string trace_to_text(const std::vector<TracePoint>& trace);

}  // namespace mimocc
