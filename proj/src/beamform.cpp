#include "mimocc/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace mimocc {
namespace {

constexpr double kLog2 = 0.6931471805599453;  // ln 2
constexpr double kNullTol = 1e-10;            // singular values below tol*sigma_max are null

double log2_safe(double x) { return std::log2(x); }

// Warm-start direction for a stream: a strong right singular vector of its
// stacked target channels. Copies of the same codeword take successive
// singular directions so they start mutually distinguishable.
Eigen::VectorXcd stacked_singular_direction(const ChannelSet& channels,
                                            const Stream& stream) {
  const int L = static_cast<int>(channels.H.front().cols());
  Eigen::MatrixXcd stacked(static_cast<int>(stream.targets.size()) *
                               channels.H.front().rows(),
                           L);
  int row = 0;
  for (int k : stream.targets) {
    const auto& h = channels.of(k);
    stacked.middleRows(row, h.rows()) = h;
    row += static_cast<int>(h.rows());
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
  return svd.matrixV().col((stream.copy - 1) % L);
}

std::string join_users(const std::vector<int>& users) {
  std::string out;
  for (size_t i = 0; i < users.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(users[i]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Unicast plan
// ---------------------------------------------------------------------------

UnicastPlan unicast_plan(const std::vector<int>& users, int omega, int beta,
                         int t) {
  std::vector<int> sorted_users = users;
  std::sort(sorted_users.begin(), sorted_users.end());
  if (static_cast<int>(sorted_users.size()) != omega)
    throw Error(Errc::invalid_argument, "|users| must equal omega");
  if (omega < t + 1) throw Error(Errc::bad_omega, "need omega >= t+1");
  if (beta < 1) throw Error(Errc::invalid_argument, "need beta >= 1");

  UnicastPlan plan;
  plan.users = sorted_users;
  plan.omega = omega;
  plan.t = t;
  plan.beta = beta;
  plan.S = static_cast<int>(binomial(omega - 1, t));
  plan.assignments.assign(
      plan.S, std::vector<std::vector<SubpacketId>>(sorted_users.size()));

  for (size_t i = 0; i < sorted_users.size(); ++i) {
    const int k = sorted_users[i];
    std::vector<int> others;
    for (int u : sorted_users)
      if (u != k) others.push_back(u);
    const auto packets = subsets_of_size(others, t);  // the superset P_k

    // N_{P,k}: beta fresh subpackets per packet index, q = 1..beta.
    std::vector<std::vector<SubpacketId>> pools(packets.size());
    for (size_t p = 0; p < packets.size(); ++p)
      for (int q = 1; q <= beta; ++q)
        pools[p].push_back(SubpacketId{k, packets[p], q});

    for (int s = 0; s < plan.S; ++s) {
      auto& chosen = plan.assignments[s][i];
      for (int picked = 0; picked < beta; ++picked) {
        int best = -1;
        for (size_t p = 0; p < pools.size(); ++p) {
          if (pools[p].empty()) continue;
          if (best < 0 || pools[p].size() > pools[best].size()) best = static_cast<int>(p);
          // ties: keep the lexicographically smallest packet index (scan order)
        }
        if (best < 0)
          throw Error(Errc::exhausted_subpackets,
                      "subpacket pools drained early");
        chosen.push_back(pools[best].front());
        pools[best].erase(pools[best].begin());
      }
      std::sort(chosen.begin(), chosen.end());
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Streams
// ---------------------------------------------------------------------------

std::vector<int> StreamSet::active_for(int user) const {
  std::vector<int> out;
  for (size_t s = 0; s < streams.size(); ++s) {
    const auto& cached = streams[s].cached_at;
    if (!std::binary_search(cached.begin(), cached.end(), user))
      out.push_back(static_cast<int>(s));
  }
  return out;
}

StreamSet streams_from_transmission(const ExtendedSchedule& schedule,
                                    int tx_index) {
  if (tx_index < 0 ||
      tx_index >= static_cast<int>(schedule.transmissions.size()))
    throw Error(Errc::invalid_argument, "transmission index out of range");
  const auto& tx = schedule.transmissions[tx_index];
  StreamSet set;
  std::map<CodewordIndex, int> group_of;
  for (const auto& entry : tx) group_of.emplace(entry.index, 0);
  int next = 0;
  for (auto& [index, id] : group_of) {
    id = next++;
    set.group_labels.push_back(join_users(index));
  }
  set.num_groups = next;
  set.groups.assign(next, {});
  for (const auto& entry : tx) {
    Stream stream;
    stream.targets = entry.index;
    stream.group = group_of[entry.index];
    stream.copy = entry.copy;
    stream.label = join_users(entry.index) + "#" + std::to_string(entry.copy);
    set.groups[stream.group].push_back(static_cast<int>(set.streams.size()));
    set.streams.push_back(std::move(stream));
  }
  return set;
}

StreamSet streams_from_unicast(const UnicastPlan& plan, int s) {
  if (s < 0 || s >= plan.S)
    throw Error(Errc::invalid_argument, "transmission index out of range");
  StreamSet set;
  for (size_t i = 0; i < plan.users.size(); ++i) {
    for (const auto& sp : plan.assignments[s][i]) {
      Stream stream;
      stream.targets = {sp.user};
      stream.cached_at = sp.packet;
      stream.group = static_cast<int>(set.streams.size());
      stream.copy = 1;
      stream.label = "P=" + join_users(sp.packet) +
                     ",k=" + std::to_string(sp.user) +
                     ",q=" + std::to_string(sp.sub);
      set.group_labels.push_back(stream.label);
      set.groups.push_back({stream.group});
      set.streams.push_back(std::move(stream));
    }
  }
  set.num_groups = static_cast<int>(set.streams.size());
  return set;
}

// ---------------------------------------------------------------------------
// Beamformers
// ---------------------------------------------------------------------------

double TxBeamformers::total_power() const {
  double power = 0;
  for (const auto& v : w) power += v.squaredNorm();
  return power;
}

const Eigen::MatrixXcd& RxCombiners::basis_of(int user) const {
  for (size_t i = 0; i < users.size(); ++i)
    if (users[i] == user) return bases[i];
  throw Error(Errc::unknown_user, "no basis for user " + std::to_string(user));
}

RxCombiners rx_bases(const ChannelSet& channels, int beta) {
  RxCombiners rx;
  rx.users = channels.users;
  for (const auto& h : channels.H) {
    if (beta > h.rows())
      throw Error(Errc::invalid_argument, "beta exceeds receive dimensions");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeFullU);
    rx.bases.push_back(svd.matrixU().leftCols(beta));
  }
  return rx;
}

TxBeamformers zf_tx_beamformers(const ChannelSet& channels,
                                const UnicastPlan& plan, int s,
                                const RxCombiners& rx, double P_T) {
  const auto streams = streams_from_unicast(plan, s);
  const int L = static_cast<int>(channels.H.front().cols());
  const double per_stream_power =
      P_T / static_cast<double>(plan.omega * plan.beta);

  TxBeamformers W;
  W.w.resize(streams.streams.size());

  // Group streams by (user, packet index): they share the equivalent
  // interference channel and need mutually orthonormal directions.
  std::map<std::pair<int, PacketIndex>, std::vector<int>> by_pair;
  for (size_t i = 0; i < streams.streams.size(); ++i) {
    const auto& stream = streams.streams[i];
    by_pair[{stream.targets[0], stream.cached_at}].push_back(
        static_cast<int>(i));
  }

  for (const auto& [pair, ids] : by_pair) {
    const auto& [k, packet] = pair;
    std::vector<int> unwanted;
    for (int u : plan.users) {
      if (u == k) continue;
      if (std::binary_search(packet.begin(), packet.end(), u)) continue;
      unwanted.push_back(u);
    }
    Eigen::MatrixXcd basis;
    if (unwanted.empty()) {
      // No ZF constraint: use the strongest right singular directions of the
      // intended user's own channel.
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(channels.of(k),
                                             Eigen::ComputeFullV);
      basis = svd.matrixV();
    } else {
      Eigen::MatrixXcd stacked(
          static_cast<int>(unwanted.size()) * plan.beta, L);
      int row = 0;
      for (int u : unwanted) {
        stacked.middleRows(row, plan.beta) =
            rx.basis_of(u).adjoint() * channels.of(u);
        row += plan.beta;
      }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      const double tol = kNullTol * sv(0);
      int rank = 0;
      while (rank < sv.size() && sv(rank) > tol) ++rank;
      const int nullity = L - rank;
      if (nullity < static_cast<int>(ids.size()))
        throw Error(Errc::null_space_too_small,
                    "nullity " + std::to_string(nullity) + " < " +
                        std::to_string(ids.size()) + " streams for (P=" +
                        join_users(packet) + ", k=" + std::to_string(k) + ")");
      basis = svd.matrixV().rightCols(nullity);
    }
    for (size_t j = 0; j < ids.size(); ++j)
      W.w[ids[j]] = basis.col(j) * std::sqrt(per_stream_power);
  }
  return W;
}

UnicastDecodeReport unicast_decode_report(const ChannelSet& channels,
                                          const UnicastPlan& plan,
                                          const std::vector<TxBeamformers>& W,
                                          const RxCombiners& rx, double N0) {
  if (static_cast<int>(W.size()) != plan.S)
    throw Error(Errc::invalid_argument, "need one beamformer set per transmission");
  UnicastDecodeReport report;
  report.residual.resize(plan.S);
  report.sinr.resize(plan.S);

  for (int s = 0; s < plan.S; ++s) {
    const auto streams = streams_from_unicast(plan, s);
    report.residual[s].resize(plan.users.size());
    report.sinr[s].resize(plan.users.size());
    for (size_t i = 0; i < plan.users.size(); ++i) {
      const int k = plan.users[i];
      std::vector<int> desired, interference;
      for (size_t j = 0; j < streams.streams.size(); ++j) {
        const auto& stream = streams.streams[j];
        if (stream.targets[0] == k) {
          desired.push_back(static_cast<int>(j));
        } else if (!std::binary_search(stream.cached_at.begin(),
                                       stream.cached_at.end(), k)) {
          interference.push_back(static_cast<int>(j));
        }
      }
      const auto& u_basis = rx.basis_of(k);
      const auto& h = channels.of(k);
      Eigen::MatrixXcd a(u_basis.cols(), desired.size());
      for (size_t j = 0; j < desired.size(); ++j)
        a.col(j) = u_basis.adjoint() * h * W[s].w[desired[j]];
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
          a, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= 0 || sv(0) / sv(sv.size() - 1) > 1e12)
        throw Error(Errc::singular_effective_channel,
                    "effective channel condition number above 1e12");
      Eigen::MatrixXcd a_inv = svd.solve(
          Eigen::MatrixXcd::Identity(desired.size(), desired.size()));

      Eigen::MatrixXcd b(u_basis.cols(), interference.size());
      for (size_t j = 0; j < interference.size(); ++j)
        b.col(j) = u_basis.adjoint() * h * W[s].w[interference[j]];
      const Eigen::MatrixXcd leak = a_inv * b;
      const Eigen::MatrixXcd noise_shape = a_inv * a_inv.adjoint();

      auto& res_row = report.residual[s][i];
      auto& sinr_row = report.sinr[s][i];
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(desired.size());
           ++j) {
        const double interf = leak.cols() ? leak.row(j).squaredNorm() : 0.0;
        const double noise = N0 * noise_shape(j, j).real();
        res_row.push_back(interf);
        sinr_row.push_back(1.0 / (noise + interf));
        report.max_residual = std::max(report.max_residual, interf);
      }
    }
  }
  return report;
}

double unicast_decode_residual(const ChannelSet& channels,
                               const UnicastPlan& plan,
                               const std::vector<TxBeamformers>& W,
                               const RxCombiners& rx, double N0) {
  return unicast_decode_report(channels, plan, W, rx, N0).max_residual;
}

// ---------------------------------------------------------------------------
// MMSE receivers and per-stream metrics
// ---------------------------------------------------------------------------

RxCombiners mmse_receivers(const ChannelSet& channels, const StreamSet& streams,
                           const TxBeamformers& W, double N0) {
  if (streams.streams.empty())
    throw Error(Errc::invalid_argument, "empty stream set");
  RxCombiners rx;
  rx.per_stream.resize(streams.streams.size());

  std::map<int, Eigen::MatrixXcd> inv_cov;  // per user
  for (size_t s = 0; s < streams.streams.size(); ++s) {
    for (int k : streams.streams[s].targets) {
      if (inv_cov.count(k)) continue;
      const auto& h = channels.of(k);
      Eigen::MatrixXcd m =
          N0 * Eigen::MatrixXcd::Identity(h.rows(), h.rows());
      for (int sid : streams.active_for(k)) {
        const Eigen::VectorXcd hw = h * W.w[sid];
        m += hw * hw.adjoint();
      }
      inv_cov.emplace(k, m.inverse());
    }
  }
  for (size_t s = 0; s < streams.streams.size(); ++s) {
    const auto& stream = streams.streams[s];
    rx.per_stream[s].resize(stream.targets.size());
    for (size_t pos = 0; pos < stream.targets.size(); ++pos) {
      const int k = stream.targets[pos];
      rx.per_stream[s][pos] = inv_cov.at(k) * (channels.of(k) * W.w[s]);
    }
  }
  return rx;
}

namespace {

// Signal and interference-plus-noise powers for (stream, target position).
std::pair<double, double> link_powers(const ChannelSet& channels,
                                      const StreamSet& streams,
                                      const TxBeamformers& W,
                                      const RxCombiners& rx, double N0,
                                      int stream, int target_pos) {
  const int k = streams.streams[stream].targets[target_pos];
  const auto& u = rx.per_stream[stream][target_pos];
  const Eigen::RowVectorXcd uh = u.adjoint() * channels.of(k);
  double interference = 0;
  for (int sid : streams.active_for(k)) {
    if (sid == stream) continue;
    interference += std::norm((uh * W.w[sid]).value());
  }
  const double signal = std::norm((uh * W.w[stream]).value());
  return {signal, interference + N0 * u.squaredNorm()};
}

}  // namespace

double stream_sinr(const ChannelSet& channels, const StreamSet& streams,
                   const TxBeamformers& W, const RxCombiners& rx, double N0,
                   int stream, int target_pos) {
  const auto [signal, denom] =
      link_powers(channels, streams, W, rx, N0, stream, target_pos);
  return signal / denom;
}

double stream_mse(const ChannelSet& channels, const StreamSet& streams,
                  const TxBeamformers& W, const RxCombiners& rx, double N0,
                  int stream, int target_pos) {
  const int k = streams.streams[stream].targets[target_pos];
  const auto& u = rx.per_stream[stream][target_pos];
  const Eigen::RowVectorXcd uh = u.adjoint() * channels.of(k);
  const std::complex<double> direct = (uh * W.w[stream]).value();
  double mse = std::norm(1.0 - direct);
  for (int sid : streams.active_for(k)) {
    if (sid == stream) continue;
    mse += std::norm((uh * W.w[sid]).value());
  }
  return mse + N0 * u.squaredNorm();
}

RateBreakdown evaluate_rates(const ChannelSet& channels,
                             const StreamSet& streams, const TxBeamformers& W,
                             const RxCombiners& rx, double N0) {
  RateBreakdown breakdown;
  breakdown.stream_rates.resize(streams.streams.size());
  for (size_t s = 0; s < streams.streams.size(); ++s) {
    double worst = std::numeric_limits<double>::infinity();
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      const double gamma = stream_sinr(channels, streams, W, rx, N0,
                                       static_cast<int>(s),
                                       static_cast<int>(pos));
      worst = std::min(worst, log2_safe(1.0 + gamma));
    }
    breakdown.stream_rates[s] = worst;
    breakdown.sum_rate += worst;
  }
  breakdown.group_rates.assign(streams.num_groups, 0.0);
  for (int g = 0; g < streams.num_groups; ++g)
    for (int sid : streams.groups[g])
      breakdown.group_rates[g] += breakdown.stream_rates[sid];
  breakdown.r_common =
      *std::min_element(breakdown.group_rates.begin(),
                        breakdown.group_rates.end());
  return breakdown;
}

// ---------------------------------------------------------------------------
// KKT inner solver
// ---------------------------------------------------------------------------

namespace {

void refresh_rates_and_duals(const StreamSet& streams, KktState& state) {
  state.stream_rate.assign(streams.streams.size(), 0.0);
  for (size_t s = 0; s < streams.streams.size(); ++s) {
    double num = 0, den = 0;
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      num += state.v[s][pos] * log2_safe(1.0 / state.eps[s][pos]);
      den += state.v[s][pos];
    }
    state.stream_rate[s] = den > 0 ? num / den : 0.0;
  }
  state.group_rate.assign(streams.num_groups, 0.0);
  for (int g = 0; g < streams.num_groups; ++g)
    for (int sid : streams.groups[g])
      state.group_rate[g] += state.stream_rate[sid];
  const auto min_it =
      std::min_element(state.group_rate.begin(), state.group_rate.end());
  state.r_common = *min_it;
  state.zeta.assign(streams.num_groups, 0.0);
  state.zeta[static_cast<int>(min_it - state.group_rate.begin())] = 1.0;
}

void refresh_linearization(const StreamSet& streams, KktState& state) {
  for (size_t s = 0; s < streams.streams.size(); ++s) {
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      const double t_point = log2_safe(1.0 / state.eps[s][pos]);
      state.t_epi[s][pos] = t_point;
      const double f_inv = std::pow(2.0, -t_point);  // = eps at the point
      state.alpha_lin[s][pos] = kLog2 * f_inv;
      state.psi_lin[s][pos] = f_inv * (1.0 + t_point * kLog2);
    }
  }
}

}  // namespace

KktState kkt_init(const ChannelSet& channels, const StreamSet& streams,
                  const TxBeamformers& W, const RxCombiners& rx, double P_T,
                  double N0, double step) {
  KktState state;
  state.step = step;
  const size_t n = streams.streams.size();
  state.v.resize(n);
  state.lambda.resize(n);
  state.eps.resize(n);
  state.t_epi.resize(n);
  state.alpha_lin.resize(n);
  state.psi_lin.resize(n);
  for (size_t s = 0; s < n; ++s) {
    const size_t m = streams.streams[s].targets.size();
    state.v[s].assign(m, 1.0 / static_cast<double>(m));
    state.lambda[s].assign(m, 0.0);
    state.eps[s].assign(m, 0.0);
    state.t_epi[s].assign(m, 0.0);
    state.alpha_lin[s].assign(m, 0.0);
    state.psi_lin[s].assign(m, 0.0);
    for (size_t pos = 0; pos < m; ++pos)
      state.eps[s][pos] = stream_mse(channels, streams, W, rx, N0,
                                     static_cast<int>(s),
                                     static_cast<int>(pos));
  }
  refresh_linearization(streams, state);
  double mu = 0;
  for (size_t s = 0; s < n; ++s)
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      state.lambda[s][pos] = state.v[s][pos] / (state.eps[s][pos] * kLog2);
      mu += state.lambda[s][pos] * rx.per_stream[s][pos].squaredNorm();
    }
  state.mu = mu / P_T;
  refresh_rates_and_duals(streams, state);
  return state;
}

std::pair<TxBeamformers, KktState> kkt_transmit_update(
    const ChannelSet& channels, const StreamSet& streams,
    const RxCombiners& rx, KktState state, double P_T, double N0) {
  const size_t n = streams.streams.size();
  const int L = static_cast<int>(channels.H.front().cols());

  // Per-user dual-weighted covariance of combined channels.
  std::map<int, Eigen::MatrixXcd> user_cov;
  std::map<int, std::vector<int>> user_active;
  for (size_t s = 0; s < n; ++s) {
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      const int k = streams.streams[s].targets[pos];
      if (!user_cov.count(k)) {
        user_cov.emplace(k, Eigen::MatrixXcd::Zero(L, L));
        user_active.emplace(k, streams.active_for(k));
      }
      const Eigen::VectorXcd a =
          channels.of(k).adjoint() * rx.per_stream[s][pos];
      user_cov.at(k) += state.lambda[s][pos] * (a * a.adjoint());
    }
  }

  // (1) Closed-form transmit vectors from the current duals.
  TxBeamformers W;
  W.w.resize(n);
  for (size_t s = 0; s < n; ++s) {
    Eigen::MatrixXcd a_matrix =
        state.mu * Eigen::MatrixXcd::Identity(L, L);
    for (const auto& [k, cov] : user_cov) {
      const auto& active = user_active.at(k);
      if (std::binary_search(active.begin(), active.end(),
                             static_cast<int>(s)))
        a_matrix += cov;
    }
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(L);
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      const int k = streams.streams[s].targets[pos];
      rhs += state.lambda[s][pos] *
             (channels.of(k).adjoint() * rx.per_stream[s][pos]);
    }
    W.w[s] = a_matrix.ldlt().solve(rhs);
  }

  // (2) MSE at the new transmit vectors.
  for (size_t s = 0; s < n; ++s)
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos)
      state.eps[s][pos] = stream_mse(channels, streams, W, rx, N0,
                                     static_cast<int>(s),
                                     static_cast<int>(pos));

  // (3) lambda and (4) mu.
  double mu = 0;
  for (size_t s = 0; s < n; ++s)
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      state.lambda[s][pos] = state.v[s][pos] / (state.eps[s][pos] * kLog2);
      mu += state.lambda[s][pos] * rx.per_stream[s][pos].squaredNorm();
    }
  state.mu = mu / P_T;

  // (5) Projected subgradient step on v, then per-group normalization.
  state.iter += 1;
  const double step_now = state.step / std::sqrt(static_cast<double>(state.iter));
  for (size_t s = 0; s < n; ++s) {
    const int g = streams.streams[s].group;
    const double q_count = static_cast<double>(streams.groups[g].size());
    for (size_t pos = 0; pos < streams.streams[s].targets.size(); ++pos) {
      const double grad = (state.r_common - state.group_rate[g]) / q_count +
                          state.stream_rate[s] +
                          log2_safe(state.eps[s][pos]);
      state.v[s][pos] = std::max(0.0, state.v[s][pos] + step_now * grad);
    }
  }
  // Normalize the total dual mass. The distribution across groups is the
  // active-group weight (the per-group sums converge to the group duals, zero
  // for slack groups); the overall scale cancels out of the beamformer
  // update, which is invariant to scaling (lambda, mu) jointly.
  double total = 0;
  for (const auto& per_stream : state.v)
    total += std::accumulate(per_stream.begin(), per_stream.end(), 0.0);
  if (total > 1e-12) {
    const double scale = static_cast<double>(n) / total;
    for (auto& per_stream : state.v)
      for (auto& value : per_stream) value *= scale;
  } else {
    for (auto& per_stream : state.v)
      for (auto& value : per_stream)
        value = 1.0 / static_cast<double>(per_stream.size());
  }

  // (6) Rate bookkeeping and refreshed linearization point.
  refresh_rates_and_duals(streams, state);
  refresh_linearization(streams, state);
  if (!std::isfinite(state.r_common))
    throw Error(Errc::diverged, "common rate is non-finite");
  return {std::move(W), std::move(state)};
}

// ---------------------------------------------------------------------------
// Generic first-order transmit solver (cross-check route)
// ---------------------------------------------------------------------------

namespace {

void scale_to_power(TxBeamformers& W, double P_T) {
  const double power = W.total_power();
  if (power <= 0) return;
  const double scale = std::sqrt(P_T / power);
  for (auto& w : W.w) w *= scale;
}

struct SmoothEval {
  double exact = 0;
  double smoothed = 0;
  std::vector<Eigen::VectorXcd> grad;
};

SmoothEval smoothed_objective(const ChannelSet& channels,
                              const StreamSet& streams,
                              const TxBeamformers& W, const RxCombiners& rx,
                              double N0, double tau, bool with_grad) {
  const size_t n = streams.streams.size();
  const int L = static_cast<int>(channels.H.front().cols());
  SmoothEval eval;

  // Per (stream, target): rate, SINR pieces, and cross coefficients.
  std::vector<std::vector<double>> rate(n), gamma(n), denom(n);
  std::vector<std::vector<Eigen::VectorXcd>> a_vec(n);
  std::vector<std::vector<std::vector<std::complex<double>>>> cross(n);
  for (size_t s = 0; s < n; ++s) {
    const auto& targets = streams.streams[s].targets;
    rate[s].resize(targets.size());
    gamma[s].resize(targets.size());
    denom[s].resize(targets.size());
    a_vec[s].resize(targets.size());
    cross[s].assign(targets.size(),
                    std::vector<std::complex<double>>(n, 0.0));
    for (size_t pos = 0; pos < targets.size(); ++pos) {
      const int k = targets[pos];
      const auto& u = rx.per_stream[s][pos];
      const Eigen::VectorXcd a = channels.of(k).adjoint() * u;
      a_vec[s][pos] = a;
      double interference = 0;
      for (int sid : streams.active_for(k)) {
        const std::complex<double> c = a.dot(W.w[sid]);
        cross[s][pos][sid] = c;
        if (sid != static_cast<int>(s)) interference += std::norm(c);
      }
      const double d = interference + N0 * u.squaredNorm();
      const double g_val = std::norm(cross[s][pos][s]) / d;
      denom[s][pos] = d;
      gamma[s][pos] = g_val;
      rate[s][pos] = log2_safe(1.0 + g_val);
    }
  }

  // Soft-min over targets within each stream, sums per group, soft-min over
  // groups; the exact counterpart uses hard minima.
  std::vector<double> stream_soft(n), exact_stream(n);
  std::vector<std::vector<double>> target_weight(n);
  for (size_t s = 0; s < n; ++s) {
    const auto& r = rate[s];
    const double m = *std::min_element(r.begin(), r.end());
    double z = 0;
    target_weight[s].resize(r.size());
    for (double value : r) z += std::exp(-tau * (value - m));
    stream_soft[s] = m - std::log(z) / tau;
    exact_stream[s] = m;
    for (size_t pos = 0; pos < r.size(); ++pos)
      target_weight[s][pos] = std::exp(-tau * (r[pos] - m)) / z;
  }
  std::vector<double> group_soft(streams.num_groups, 0.0),
      group_exact(streams.num_groups, 0.0);
  for (int g = 0; g < streams.num_groups; ++g)
    for (int sid : streams.groups[g]) {
      group_soft[g] += stream_soft[sid];
      group_exact[g] += exact_stream[sid];
    }
  const double gm =
      *std::min_element(group_soft.begin(), group_soft.end());
  double gz = 0;
  std::vector<double> group_weight(streams.num_groups);
  for (double value : group_soft) gz += std::exp(-tau * (value - gm));
  for (int g = 0; g < streams.num_groups; ++g)
    group_weight[g] = std::exp(-tau * (group_soft[g] - gm)) / gz;
  eval.smoothed = gm - std::log(gz) / tau;
  eval.exact = *std::min_element(group_exact.begin(), group_exact.end());

  if (!with_grad) return eval;
  eval.grad.assign(n, Eigen::VectorXcd::Zero(L));
  for (size_t s = 0; s < n; ++s) {
    const auto& targets = streams.streams[s].targets;
    for (size_t pos = 0; pos < targets.size(); ++pos) {
      const double weight =
          group_weight[streams.streams[s].group] * target_weight[s][pos];
      if (weight < 1e-14) continue;
      const double d_rate =
          weight / ((1.0 + gamma[s][pos]) * kLog2 * denom[s][pos]);
      const int k = targets[pos];
      const auto& a = a_vec[s][pos];
      for (int sid : streams.active_for(k)) {
        if (sid == static_cast<int>(s)) {
          eval.grad[sid] += d_rate * cross[s][pos][sid] * a;
        } else {
          eval.grad[sid] -=
              d_rate * gamma[s][pos] * cross[s][pos][sid] * a;
        }
      }
    }
  }
  return eval;
}

TxBeamformers generic_transmit_step(const ChannelSet& channels,
                                    const StreamSet& streams,
                                    const TxBeamformers& start,
                                    const RxCombiners& rx, double P_T,
                                    double N0, int max_iter) {
  TxBeamformers best = start;
  scale_to_power(best, P_T);
  double best_exact =
      smoothed_objective(channels, streams, best, rx, N0, 10.0, false).exact;

  TxBeamformers current = best;
  for (double tau : {10.0, 100.0, 1000.0}) {
    double step_size = 0.1 * P_T;
    for (int it = 0; it < max_iter; ++it) {
      const auto eval =
          smoothed_objective(channels, streams, current, rx, N0, tau, true);
      double grad_norm2 = 0;
      for (const auto& g : eval.grad) grad_norm2 += g.squaredNorm();
      if (grad_norm2 < 1e-18) break;

      bool accepted = false;
      while (step_size > 1e-12 * P_T) {
        TxBeamformers trial = current;
        for (size_t s = 0; s < trial.w.size(); ++s)
          trial.w[s] += step_size * eval.grad[s];
        scale_to_power(trial, P_T);
        const auto trial_eval =
            smoothed_objective(channels, streams, trial, rx, N0, tau, false);
        if (trial_eval.smoothed > eval.smoothed + 1e-14) {
          current = std::move(trial);
          if (trial_eval.exact > best_exact) {
            best_exact = trial_eval.exact;
            best = current;
          }
          accepted = true;
          step_size *= 2.0;
          break;
        }
        step_size *= 0.5;
      }
      if (!accepted) break;
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Alternating optimization
// ---------------------------------------------------------------------------

LinearDesignResult optimize_linear(const ChannelSet& channels,
                                   const StreamSet& streams, double P_T,
                                   double N0,
                                   const LinearDesignOptions& opts) {
  if (streams.streams.empty())
    throw Error(Errc::invalid_argument, "empty stream set");
  const size_t n = streams.streams.size();

  TxBeamformers W;
  W.w.resize(n);
  if (!opts.initial_w.empty()) {
    if (opts.initial_w.size() != n)
      throw Error(Errc::invalid_argument, "initial_w size mismatch");
    W.w = opts.initial_w;
  } else {
    const double per_stream = P_T / static_cast<double>(n);
    for (size_t s = 0; s < n; ++s)
      W.w[s] = stacked_singular_direction(channels, streams.streams[s]) *
               std::sqrt(per_stream);
  }
  scale_to_power(W, P_T);

  LinearDesignResult result;
  result.W = W;
  result.U = mmse_receivers(channels, streams, W, N0);
  {
    const auto breakdown =
        evaluate_rates(channels, streams, result.W, result.U, N0);
    result.r_common = breakdown.r_common;
  }
  result.trace.push_back({0, result.r_common, result.W.total_power()});

  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    const double previous = result.r_common;
    const RxCombiners U = mmse_receivers(channels, streams, result.W, N0);

    // Transmit step at fixed receivers; keep the best iterate by the exact
    // fixed-receiver objective (the starting point is a candidate, so the
    // step can never lose ground).
    TxBeamformers W_best = result.W;
    double best_fixed =
        evaluate_rates(channels, streams, W_best, U, N0).r_common;

    try {
      if (opts.solver == TxSolver::kkt) {
        KktState state =
            kkt_init(channels, streams, result.W, U, P_T, N0, opts.step);
        double last_rc = state.r_common;
        for (int inner = 0; inner < opts.max_inner; ++inner) {
          auto [W_new, state_new] =
              kkt_transmit_update(channels, streams, U, std::move(state),
                                  P_T, N0);
          state = std::move(state_new);
          TxBeamformers scaled = W_new;
          scale_to_power(scaled, P_T);
          const double fixed =
              evaluate_rates(channels, streams, scaled, U, N0).r_common;
          if (fixed > best_fixed) {
            best_fixed = fixed;
            W_best = std::move(scaled);
          }
          if (inner > 0 && std::abs(state.r_common - last_rc) < opts.tol_inner)
            break;
          last_rc = state.r_common;
        }
      } else {
        W_best = generic_transmit_step(channels, streams, result.W, U, P_T,
                                       N0, opts.max_inner);
      }
    } catch (const Error& err) {
      if (err.code() != Errc::diverged) throw;
      // Keep the incumbent; the result is reported as not converged below.
    }

    // Accept only if the true (refreshed-receiver) objective improves.
    const RxCombiners U_cand = mmse_receivers(channels, streams, W_best, N0);
    const double candidate =
        evaluate_rates(channels, streams, W_best, U_cand, N0).r_common;
    if (candidate > result.r_common) {
      result.W = std::move(W_best);
      result.U = U_cand;
      result.r_common = candidate;
    }
    result.trace.push_back(
        {outer, result.r_common, result.W.total_power()});
    if (std::abs(result.r_common - previous) < opts.tol_outer) {
      result.converged = true;
      break;
    }
  }

  const auto breakdown =
      evaluate_rates(channels, streams, result.W, result.U, N0);
  result.stream_rates = breakdown.stream_rates;
  result.group_rates = breakdown.group_rates;
  result.r_common = breakdown.r_common;
  return result;
}

LinearDesignResult optimize_linear(const ChannelSet& channels,
                                   const ExtendedSchedule& schedule,
                                   int tx_index, double P_T, double N0,
                                   const LinearDesignOptions& opts) {
  return optimize_linear(channels,
                         streams_from_transmission(schedule, tx_index), P_T,
                         N0, opts);
}

std::string trace_to_text(const std::vector<TracePoint>& trace) {
  std::ostringstream os;
  os.precision(12);
  for (const auto& point : trace)
    os << point.iteration << ' ' << point.r_common << ' ' << point.power
       << '\n';
  return os.str();
}

}  // namespace mimocc
