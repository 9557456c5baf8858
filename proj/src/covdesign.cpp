#include "mimocc/covdesign.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace mimocc {
namespace {

constexpr double kLog2 = 0.6931471805599453;

double logdet2(const Eigen::MatrixXcd& m) {
  // log2 det of a Hermitian positive definite matrix via LDLT.
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(m);
  double acc = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    acc += std::log2(std::max(ldlt.vectorD()(i).real(), 1e-300));
  return acc;
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint());
}

// Project a Hermitian matrix onto the PSD cone by eigenvalue clipping.
Eigen::MatrixXcd psd_clip(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitize(m));
  Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * values.asDiagonal() *
         eig.eigenvectors().adjoint();
}

struct Constraint {
  int user_index = 0;                 // index into `regions`
  const std::vector<int>* subset = nullptr;
};

struct DesignContext {
  const ChannelSet* channels = nullptr;
  const StreamSet* messages = nullptr;
  std::vector<MacRegion> regions;     // one per user appearing in targets
  std::vector<int> region_users;
  std::vector<Constraint> constraints;
  double P_T = 0, N0 = 0;
  int L = 0;

  Eigen::MatrixXcd interference_cov(int region_index,
                                    const std::vector<Eigen::MatrixXcd>& K) const {
    const auto& region = regions[region_index];
    const auto& h = channels->of(region.user);
    Eigen::MatrixXcd q = N0 * Eigen::MatrixXcd::Identity(h.rows(), h.rows());
    for (int m : region.interference) q += h * K[m] * h.adjoint();
    return q;
  }
};

DesignContext make_context(const ChannelSet& channels,
                           const StreamSet& messages, double P_T, double N0) {
  DesignContext ctx;
  ctx.channels = &channels;
  ctx.messages = &messages;
  ctx.P_T = P_T;
  ctx.N0 = N0;
  ctx.L = static_cast<int>(channels.H.front().cols());
  std::vector<int> users;
  for (const auto& stream : messages.streams)
    for (int k : stream.targets)
      if (std::find(users.begin(), users.end(), k) == users.end())
        users.push_back(k);
  std::sort(users.begin(), users.end());
  ctx.region_users = users;
  for (int k : users) ctx.regions.push_back(mac_region_for(messages, k));
  for (size_t r = 0; r < ctx.regions.size(); ++r)
    for (const auto& subset : ctx.regions[r].subsets)
      ctx.constraints.push_back({static_cast<int>(r), &subset});
  return ctx;
}

// Exact max-min objective: min over (user, subset) of the per-message MAC
// rate bound at the covariances K.
double exact_objective(const DesignContext& ctx,
                       const std::vector<Eigen::MatrixXcd>& K) {
  double worst = std::numeric_limits<double>::infinity();
  for (size_t r = 0; r < ctx.regions.size(); ++r) {
    const auto& region = ctx.regions[r];
    const auto& h = ctx.channels->of(region.user);
    const Eigen::MatrixXcd q = ctx.interference_cov(static_cast<int>(r), K);
    const double logdet_q = logdet2(q);
    for (const auto& subset : region.subsets) {
      Eigen::MatrixXcd m = q;
      for (int id : subset) m += h * K[id] * h.adjoint();
      const double bound =
          (logdet2(m) - logdet_q) / static_cast<double>(subset.size());
      worst = std::min(worst, bound);
    }
  }
  return worst;
}

// Linearized constraint values and (optionally) the smoothed gradient at K,
// with the interference log-det replaced by its tangent at K_bar.
struct SubproblemEval {
  double exact_min = 0;   // min over constraints of the linearized bound
  double smoothed = 0;
  std::vector<Eigen::MatrixXcd> grad;
};

SubproblemEval linearized_eval(const DesignContext& ctx,
                               const std::vector<Eigen::MatrixXcd>& K,
                               const std::vector<Eigen::MatrixXcd>& K_bar,
                               const std::vector<Eigen::MatrixXcd>& q_bar_inv,
                               const std::vector<double>& logdet_q_bar,
                               double tau, bool with_grad) {
  const size_t n = K.size();
  std::vector<double> values;
  values.reserve(ctx.constraints.size());

  // Per-region helpers shared across this region's subsets.
  std::vector<double> tangent(ctx.regions.size(), 0.0);
  for (size_t r = 0; r < ctx.regions.size(); ++r) {
    const auto& region = ctx.regions[r];
    const auto& h = ctx.channels->of(region.user);
    double acc = 0;
    for (int m : region.interference) {
      const Eigen::MatrixXcd diff = K_bar[m] - K[m];
      acc += (q_bar_inv[r] * h * diff * h.adjoint()).trace().real();
    }
    tangent[r] = acc / kLog2 - logdet_q_bar[r];
  }

  std::vector<Eigen::MatrixXcd> m_full(ctx.constraints.size());
  for (size_t c = 0; c < ctx.constraints.size(); ++c) {
    const auto& constraint = ctx.constraints[c];
    const auto& region = ctx.regions[constraint.user_index];
    const auto& h = ctx.channels->of(region.user);
    Eigen::MatrixXcd m =
        ctx.N0 * Eigen::MatrixXcd::Identity(h.rows(), h.rows());
    for (int id : region.interference) m += h * K[id] * h.adjoint();
    for (int id : *constraint.subset) m += h * K[id] * h.adjoint();
    m_full[c] = m;
    const double bound =
        (logdet2(m) + tangent[constraint.user_index]) /
        static_cast<double>(constraint.subset->size());
    values.push_back(bound);
  }

  SubproblemEval eval;
  const double vmin = *std::min_element(values.begin(), values.end());
  eval.exact_min = vmin;
  double z = 0;
  std::vector<double> weights(values.size());
  for (size_t c = 0; c < values.size(); ++c)
    z += std::exp(-tau * (values[c] - vmin));
  for (size_t c = 0; c < values.size(); ++c)
    weights[c] = std::exp(-tau * (values[c] - vmin)) / z;
  eval.smoothed = vmin - std::log(z) / tau;

  if (!with_grad) return eval;
  eval.grad.assign(n, Eigen::MatrixXcd::Zero(ctx.L, ctx.L));
  for (size_t c = 0; c < ctx.constraints.size(); ++c) {
    if (weights[c] < 1e-14) continue;
    const auto& constraint = ctx.constraints[c];
    const auto& region = ctx.regions[constraint.user_index];
    const auto& h = ctx.channels->of(region.user);
    const double scale =
        weights[c] / (static_cast<double>(constraint.subset->size()) * kLog2);
    const Eigen::MatrixXcd m_inv = m_full[c].inverse();
    const Eigen::MatrixXcd inner = h.adjoint() * m_inv * h;      // d logdet
    const Eigen::MatrixXcd inner_bar =
        h.adjoint() * q_bar_inv[constraint.user_index] * h;       // tangent
    for (int id : *constraint.subset) eval.grad[id] += scale * inner;
    for (int id : region.interference)
      eval.grad[id] += scale * (inner - inner_bar);
  }
  return eval;
}

void project_feasible(std::vector<Eigen::MatrixXcd>& K, double P_T) {
  double total = 0;
  for (auto& k : K) {
    k = psd_clip(k);
    total += k.trace().real();
  }
  if (total > P_T && total > 0) {
    const double scale = P_T / total;
    for (auto& k : K) k *= scale;
  }
}

}  // namespace

double CovarianceSet::total_trace() const {
  double total = 0;
  for (const auto& k : K) total += k.trace().real();
  return total;
}

StreamSet multicast_messages(const std::vector<int>& users, int t) {
  std::vector<int> sorted_users = users;
  std::sort(sorted_users.begin(), sorted_users.end());
  if (static_cast<int>(sorted_users.size()) < t + 1)
    throw Error(Errc::bad_omega, "need |users| >= t+1");
  StreamSet set;
  for (auto& index : subsets_of_size(sorted_users, t + 1)) {
    Stream stream;
    stream.targets = index;
    stream.group = static_cast<int>(set.streams.size());
    stream.copy = 1;
    std::string label;
    for (size_t i = 0; i < index.size(); ++i)
      label += (i ? "," : "") + std::to_string(index[i]);
    stream.label = label;
    set.group_labels.push_back(label);
    set.groups.push_back({stream.group});
    set.streams.push_back(std::move(stream));
  }
  set.num_groups = static_cast<int>(set.streams.size());
  return set;
}

MacRegion mac_region_for(const StreamSet& messages, int k) {
  MacRegion region;
  region.user = k;
  for (size_t m = 0; m < messages.streams.size(); ++m) {
    const auto& stream = messages.streams[m];
    const bool intended = std::binary_search(stream.targets.begin(),
                                             stream.targets.end(), k);
    const bool cached = std::binary_search(stream.cached_at.begin(),
                                           stream.cached_at.end(), k);
    if (intended)
      region.intended.push_back(static_cast<int>(m));
    else if (!cached)
      region.interference.push_back(static_cast<int>(m));
  }
  const int m_k = static_cast<int>(region.intended.size());
  if (m_k > 20)
    throw Error(Errc::region_too_large,
                "MAC region with " + std::to_string(m_k) + " messages");
  for (unsigned mask = 1; mask < (1u << m_k); ++mask) {
    std::vector<int> subset;
    for (int bit = 0; bit < m_k; ++bit)
      if (mask & (1u << bit)) subset.push_back(region.intended[bit]);
    region.subsets.push_back(std::move(subset));
  }
  return region;
}

MacRegion mac_region(const std::vector<int>& users, int t, int k) {
  return mac_region_for(multicast_messages(users, t), k);
}

std::pair<CovarianceSet, double> sca_cov_step(const ChannelSet& channels,
                                              const StreamSet& messages,
                                              const CovarianceSet& current,
                                              double P_T, double N0,
                                              int inner_max) {
  DesignContext ctx = make_context(channels, messages, P_T, N0);
  const std::vector<Eigen::MatrixXcd>& k_bar = current.K;

  std::vector<Eigen::MatrixXcd> q_bar_inv;
  std::vector<double> logdet_q_bar;
  for (size_t r = 0; r < ctx.regions.size(); ++r) {
    const Eigen::MatrixXcd q = ctx.interference_cov(static_cast<int>(r), k_bar);
    q_bar_inv.push_back(q.inverse());
    logdet_q_bar.push_back(logdet2(q));
  }

  std::vector<Eigen::MatrixXcd> best = k_bar;
  double best_value =
      linearized_eval(ctx, best, k_bar, q_bar_inv, logdet_q_bar, 10.0, false)
          .exact_min;

  std::vector<Eigen::MatrixXcd> point = k_bar;
  for (double tau : {10.0, 100.0, 1000.0}) {
    double step = 0.5 * P_T;
    for (int it = 0; it < inner_max; ++it) {
      const auto eval = linearized_eval(ctx, point, k_bar, q_bar_inv,
                                        logdet_q_bar, tau, true);

      // On the power boundary the useful direction lives in the tangent
      // space of the trace constraint; a raw gradient step would be undone
      // by the rescaling projection.
      std::vector<std::vector<Eigen::MatrixXcd>> directions;
      double trace_now = 0, trace_grad = 0;
      for (size_t m = 0; m < point.size(); ++m) {
        trace_now += point[m].trace().real();
        trace_grad += eval.grad[m].trace().real();
      }
      if (trace_now >= P_T * (1.0 - 1e-9) && trace_grad > 0) {
        auto tangent = eval.grad;
        const double shift =
            trace_grad / (static_cast<double>(point.size()) * ctx.L);
        for (auto& g : tangent)
          g -= shift * Eigen::MatrixXcd::Identity(ctx.L, ctx.L);
        directions.push_back(std::move(tangent));
      }
      directions.push_back(eval.grad);

      bool accepted = false;
      for (const auto& direction : directions) {
        double dir_norm = 0;
        for (const auto& g : direction) dir_norm += g.squaredNorm();
        dir_norm = std::sqrt(dir_norm);
        if (dir_norm < 1e-14) continue;
        double local_step = step;
        while (local_step > 1e-12 * P_T) {
          std::vector<Eigen::MatrixXcd> trial = point;
          for (size_t m = 0; m < trial.size(); ++m)
            trial[m] += (local_step / dir_norm) * direction[m];
          project_feasible(trial, P_T);
          const auto trial_eval = linearized_eval(
              ctx, trial, k_bar, q_bar_inv, logdet_q_bar, tau, false);
          if (trial_eval.smoothed > eval.smoothed + 1e-14) {
            point = std::move(trial);
            if (trial_eval.exact_min > best_value) {
              best_value = trial_eval.exact_min;
              best = point;
            }
            accepted = true;
            step = local_step * 1.5;
            break;
          }
          local_step *= 0.5;
        }
        if (accepted) break;
      }
      if (!accepted) break;
    }
  }

  // Uniform up-scaling to the full power budget never lowers any MAC bound,
  // so the emitted point always sits on the power boundary.
  double total = 0;
  for (const auto& k : best) total += k.trace().real();
  if (total > 0 && total < P_T) {
    const double scale = P_T / total;
    for (auto& k : best) k *= scale;
  }

  CovarianceSet out;
  out.K = std::move(best);
  for (const auto& stream : messages.streams) out.labels.push_back(stream.label);
  const double achieved = exact_objective(ctx, out.K);
  return {std::move(out), achieved};
}

CovDesignResult optimize_covariances_for(const ChannelSet& channels,
                                         const StreamSet& messages, double P_T,
                                         double N0,
                                         const CovDesignOptions& opts) {
  if (messages.streams.empty())
    throw Error(Errc::invalid_argument, "empty message set");
  const int L = static_cast<int>(channels.H.front().cols());
  const size_t n = messages.streams.size();

  CovDesignResult result;
  result.covariances.K.assign(
      n, (P_T / (static_cast<double>(n) * L)) *
             Eigen::MatrixXcd::Identity(L, L));
  if (!opts.initial.empty()) {
    if (opts.initial.size() != n)
      throw Error(Errc::invalid_argument, "initial covariance count mismatch");
    result.covariances.K = opts.initial;
    project_feasible(result.covariances.K, P_T);
  }
  for (const auto& stream : messages.streams)
    result.covariances.labels.push_back(stream.label);

  DesignContext ctx = make_context(channels, messages, P_T, N0);
  result.R = exact_objective(ctx, result.covariances.K);
  result.trace.push_back(result.R);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    auto [next, achieved] = sca_cov_step(channels, messages,
                                         result.covariances, P_T, N0,
                                         opts.inner_max);
    const double delta = achieved - result.R;
    if (achieved >= result.R) {
      result.covariances = std::move(next);
      result.R = achieved;
    }
    result.trace.push_back(result.R);
    if (std::abs(delta) < opts.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

CovDesignResult optimize_covariances(const ChannelSet& channels,
                                     const std::vector<int>& users, int t,
                                     double P_T, double N0,
                                     const CovDesignOptions& opts) {
  return optimize_covariances_for(channels, multicast_messages(users, t), P_T,
                                  N0, opts);
}

bool verify_mac_feasibility(const ChannelSet& channels,
                            const StreamSet& messages,
                            const std::vector<Eigen::MatrixXcd>& K,
                            const std::vector<double>& rates, double P_T,
                            double N0, double slack) {
  if (K.size() != messages.streams.size() ||
      rates.size() != messages.streams.size())
    throw Error(Errc::invalid_argument, "covariance/rate count mismatch");

  double total = 0;
  for (const auto& k : K) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitize(k));
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, P_T))
      return false;
    total += k.trace().real();
  }
  if (total > P_T * (1.0 + 1e-9) + slack) return false;

  DesignContext ctx = make_context(channels, messages, P_T, N0);
  for (size_t r = 0; r < ctx.regions.size(); ++r) {
    const auto& region = ctx.regions[r];
    const auto& h = channels.of(region.user);
    const Eigen::MatrixXcd q = ctx.interference_cov(static_cast<int>(r), K);
    const double logdet_q = logdet2(q);
    for (const auto& subset : region.subsets) {
      Eigen::MatrixXcd m = q;
      double lhs = 0;
      for (int id : subset) {
        m += h * K[id] * h.adjoint();
        lhs += rates[id];
      }
      if (lhs > logdet2(m) - logdet_q + slack) return false;
    }
  }
  return true;
}

bool verify_mac_feasibility(const ChannelSet& channels,
                            const StreamSet& messages,
                            const std::vector<Eigen::MatrixXcd>& K, double R,
                            double P_T, double N0, double slack) {
  return verify_mac_feasibility(
      channels, messages, K,
      std::vector<double>(messages.streams.size(), R), P_T, N0, slack);
}

std::string to_text(const CovarianceSet& set) {
  std::ostringstream os;
  os.precision(17);
  for (size_t m = 0; m < set.K.size(); ++m) {
    const auto& k = set.K[m];
    os << (m < set.labels.size() ? set.labels[m] : std::string("?")) << ' '
       << k.rows() << '\n';
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        if (j) os << ' ';
        os << k(i, j).real() << ' ' << k(i, j).imag();
      }
      os << '\n';
    }
  }
  return os.str();
}

CovarianceSet covariances_from_text(const std::string& text) {
  std::istringstream is(text);
  CovarianceSet set;
  std::string label;
  int rows;
  while (is >> label >> rows) {
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(rows, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j <= i; ++j) {
        double re, im;
        if (!(is >> re >> im))
          throw Error(Errc::io_error, "truncated covariance text");
        k(i, j) = {re, im};
        if (i != j) k(j, i) = std::conj(k(i, j));
      }
    set.labels.push_back(label);
    set.K.push_back(std::move(k));
  }
  if (set.K.empty()) throw Error(Errc::io_error, "empty covariance text");
  return set;
}

}  // namespace mimocc
