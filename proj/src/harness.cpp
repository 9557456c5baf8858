#include "mimocc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mimocc/beamform.hpp"
#include "mimocc/covdesign.hpp"
#include "mimocc/rate.hpp"
#include "mimocc/rng.hpp"

namespace mimocc {
namespace {

using json = nlohmann::json;

// Per-subset evaluation: effective per-transmission rates (the R_i whose
// reciprocal sums give the delivery time) and the mean sum rate.
struct SubsetEval {
  std::vector<double> tx_rates;
  double sum_rate = 0;
};

SubsetEval eval_subset(const ExperimentSpec& spec, const ResolvedParams& p,
                       const ChannelSet& channels,
                       const std::vector<int>& users, double P_T) {
  const NetworkConfig& cfg = spec.config;
  SubsetEval eval;
  double sum_acc = 0;
  int sum_count = 0;

  switch (spec.scheme) {
    case Scheme::uc_zf: {
      const auto plan = unicast_plan(users, p.omega, p.beta, cfg.t);
      const auto rx = rx_bases(channels, p.beta);
      std::vector<TxBeamformers> W;
      for (int s = 0; s < plan.S; ++s)
        W.push_back(zf_tx_beamformers(channels, plan, s, rx, P_T));
      const auto report = unicast_decode_report(channels, plan, W, rx, cfg.N0);
      for (int s = 0; s < plan.S; ++s) {
        double worst = std::numeric_limits<double>::infinity();
        double sum = 0;
        for (const auto& per_user : report.sinr[s])
          for (double sinr : per_user) {
            const double rate = std::log2(1.0 + sinr);
            worst = std::min(worst, rate);
            sum += rate;
          }
        eval.tx_rates.push_back(worst);
        sum_acc += sum;
        ++sum_count;
      }
      break;
    }
    case Scheme::uc_lin: {
      const auto plan = unicast_plan(users, p.omega, p.beta, cfg.t);
      for (int s = 0; s < plan.S; ++s) {
        const auto streams = streams_from_unicast(plan, s);
        const auto result = optimize_linear(channels, streams, P_T, cfg.N0);
        eval.tx_rates.push_back(result.r_common);
        double sum = 0;
        for (double r : result.stream_rates) sum += r;
        sum_acc += sum;
        ++sum_count;
      }
      break;
    }
    case Scheme::uc_cov: {
      const auto plan = unicast_plan(users, p.omega, p.beta, cfg.t);
      for (int s = 0; s < plan.S; ++s) {
        const auto messages = streams_from_unicast(plan, s);
        const auto result =
            optimize_covariances_for(channels, messages, P_T, cfg.N0);
        eval.tx_rates.push_back(result.R);
        sum_acc += result.R * static_cast<double>(messages.streams.size());
        ++sum_count;
      }
      break;
    }
    case Scheme::mc_lin: {
      const auto base = base_schedule(users, cfg.t);
      const auto ext = extended_schedule(base, p.eta, p.delta);
      for (size_t tx = 0; tx < ext.transmissions.size(); ++tx) {
        const auto streams =
            streams_from_transmission(ext, static_cast<int>(tx));
        const auto result = optimize_linear(channels, streams, P_T, cfg.N0);
        // Delivery time is set by the slowest codeword relative to its copy
        // count; with uniform copies this is just r_common.
        double effective = std::numeric_limits<double>::infinity();
        for (int g = 0; g < streams.num_groups; ++g)
          effective = std::min(effective,
                               result.group_rates[g] /
                                   static_cast<double>(streams.groups[g].size()));
        eval.tx_rates.push_back(effective);
        double sum = 0;
        for (double r : result.stream_rates) sum += r;
        sum_acc += sum;
        ++sum_count;
      }
      break;
    }
    case Scheme::mc_cov: {
      const auto messages = multicast_messages(users, cfg.t);
      const auto result =
          optimize_covariances_for(channels, messages, P_T, cfg.N0);
      eval.tx_rates.push_back(result.R);
      sum_acc += result.R * static_cast<double>(messages.streams.size());
      ++sum_count;
      break;
    }
  }
  eval.sum_rate = sum_count ? sum_acc / sum_count : 0.0;
  return eval;
}

long long theta_for(const ExperimentSpec& spec, const ResolvedParams& p) {
  const bool unicast = spec.scheme == Scheme::uc_zf ||
                       spec.scheme == Scheme::uc_lin ||
                       spec.scheme == Scheme::uc_cov;
  if (unicast)
    return subpacketization(spec.config, DeliveryScheme::unicast, p.omega,
                            p.beta, 1)
        .theta;
  const int delta = spec.scheme == Scheme::mc_cov ? 1 : p.delta;
  return subpacketization(spec.config, DeliveryScheme::multicast, p.omega, 1,
                          delta)
      .theta;
}

}  // namespace

Scheme scheme_from_name(const std::string& name) {
  if (name == "UC-ZF") return Scheme::uc_zf;
  if (name == "UC-COV") return Scheme::uc_cov;
  if (name == "UC-LIN") return Scheme::uc_lin;
  if (name == "MC-LIN") return Scheme::mc_lin;
  if (name == "MC-COV") return Scheme::mc_cov;
  throw Error(Errc::invalid_argument, "unknown scheme '" + name + "'");
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::uc_zf: return "UC-ZF";
    case Scheme::uc_cov: return "UC-COV";
    case Scheme::uc_lin: return "UC-LIN";
    case Scheme::mc_lin: return "MC-LIN";
    case Scheme::mc_cov: return "MC-COV";
  }
  return "?";
}

ResolvedParams resolve_params(const ExperimentSpec& spec) {
  const NetworkConfig& cfg = spec.config;
  ResolvedParams p;
  const bool unicast = spec.scheme == Scheme::uc_zf ||
                       spec.scheme == Scheme::uc_lin ||
                       spec.scheme == Scheme::uc_cov;
  if (spec.omega > 0) {
    p.omega = spec.omega;
  } else {
    p.omega = dof_max(cfg).omega_star;
  }
  if (p.omega < cfg.t + 1 || p.omega > cfg.K)
    throw Error(Errc::bad_omega, "omega out of range");

  if (unicast) {
    const int cap = beta_max(p.omega, cfg.t, cfg.L, cfg.G);
    p.beta = spec.beta > 0 ? spec.beta : cap;
    if (p.beta < 1 || p.beta > cap)
      throw Error(Errc::no_feasible_point,
                  "beta " + std::to_string(p.beta) +
                      " infeasible for omega " + std::to_string(p.omega));
  } else if (spec.scheme == Scheme::mc_lin) {
    const auto feasible = feasible_betas(p.omega, cfg.t, cfg.L, cfg.G);
    if (feasible.empty())
      throw Error(Errc::no_feasible_point,
                  "no linearly decodable beta for omega " +
                      std::to_string(p.omega));
    const FeasibleBeta* chosen = nullptr;
    if (spec.beta > 0) {
      for (const auto& fb : feasible)
        if (fb.beta == spec.beta) chosen = &fb;
      if (!chosen)
        throw Error(Errc::no_feasible_point,
                    "beta " + std::to_string(spec.beta) +
                        " not in the feasible set");
    } else {
      chosen = &feasible.back();  // largest feasible beta
    }
    p.beta = chosen->beta;
    p.eta = chosen->eta;
    p.delta = chosen->delta;
  } else {  // mc_cov: every codeword at once, beta is not a design knob
    p.beta = spec.beta > 0 ? spec.beta
                           : static_cast<int>(binomial(p.omega - 1, cfg.t));
    p.eta = 1;
    p.delta = 1;
  }
  return p;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  if (spec.realizations < 1)
    throw Error(Errc::invalid_argument, "need at least one realization");
  const NetworkConfig& cfg = spec.config;
  const ResolvedParams params = resolve_params(spec);
  const long long theta = theta_for(spec, params);
  const long long subset_count = binomial(cfg.K, params.omega);
  if (spec.eval_mode == EvalMode::exhaustive && subset_count > 100000)
    throw Error(Errc::invalid_argument,
                "exhaustive mode over " + std::to_string(subset_count) +
                    " subsets is not practical");

  std::vector<double> snr_points = spec.snr_grid_db;
  if (snr_points.empty())
    snr_points.push_back(snr_linear_to_db(cfg.P_T / cfg.N0));

  const std::uint64_t seed_root =
      CounterRng::mix(spec.seed + 0x9E3779B97F4A7C15ULL);

  std::vector<ResultRow> rows;
  for (double snr_db : snr_points) {
    const auto started = std::chrono::steady_clock::now();
    const double P_T = cfg.N0 * snr_db_to_linear(snr_db);

    std::vector<double> r_sym(spec.realizations,
                              std::numeric_limits<double>::quiet_NaN());
    std::vector<double> sum_rate(spec.realizations, 0.0);
    std::vector<char> failed(spec.realizations, 0);

    auto run_one = [&](int r) {
      const std::uint64_t rseed =
          CounterRng::substream(seed_root, static_cast<std::uint64_t>(r));
      try {
        if (spec.eval_mode == EvalMode::representative) {
          const auto users = iota_users(params.omega);
          const auto channels = sample_channels(cfg, users, rseed);
          const auto eval = eval_subset(spec, params, channels, users, P_T);
          double subset_time = 0;
          for (double rate : eval.tx_rates) {
            if (rate <= 0) {
              subset_time = std::numeric_limits<double>::infinity();
              break;
            }
            subset_time += 1.0 / (static_cast<double>(theta) * rate);
          }
          const double total_time =
              static_cast<double>(subset_count) * subset_time;
          r_sym[r] = std::isfinite(total_time) && total_time > 0
                         ? static_cast<double>(cfg.K) / total_time
                         : 0.0;
          sum_rate[r] = eval.sum_rate;
        } else {
          const auto all_users = iota_users(cfg.K);
          const auto channels = sample_channels(cfg, all_users, rseed);
          std::vector<double> tx_rates;
          double sum_acc = 0;
          int subsets = 0;
          for (const auto& users :
               subsets_of_size(all_users, params.omega)) {
            const auto eval = eval_subset(spec, params, channels, users, P_T);
            tx_rates.insert(tx_rates.end(), eval.tx_rates.begin(),
                            eval.tx_rates.end());
            sum_acc += eval.sum_rate;
            ++subsets;
          }
          r_sym[r] = symmetric_rate(tx_rates, theta, cfg.K);
          sum_rate[r] = subsets ? sum_acc / subsets : 0.0;
        }
      } catch (const std::exception&) {
        failed[r] = 1;
      }
    };

    const int threads = std::max(1, spec.threads);
    if (threads == 1) {
      for (int r = 0; r < spec.realizations; ++r) run_one(r);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
          int r;
          while ((r = next.fetch_add(1)) < spec.realizations) run_one(r);
        });
      for (auto& worker : pool) worker.join();
    }

    int ok = 0;
    double mean = 0, mean_sum = 0;
    for (int r = 0; r < spec.realizations; ++r) {
      if (failed[r]) continue;
      ++ok;
      mean += r_sym[r];
      mean_sum += sum_rate[r];
    }
    if (ok * 5 < spec.realizations * 4)
      throw Error(Errc::solver_failed,
                  "more than 20% of realizations failed at " +
                      std::to_string(snr_db) + " dB");
    mean /= ok;
    mean_sum /= ok;
    double var = 0;
    for (int r = 0; r < spec.realizations; ++r) {
      if (failed[r]) continue;
      var += (r_sym[r] - mean) * (r_sym[r] - mean);
    }
    const double stderr_mean =
        ok > 1 ? std::sqrt(var / (ok - 1) / ok) : 0.0;

    ResultRow row;
    row.scheme = scheme_name(spec.scheme);
    row.omega = params.omega;
    row.beta = params.beta;
    row.snr_db = snr_db;
    row.r_sym_mean = mean;
    row.r_sym_stderr = stderr_mean;
    row.sum_rate_mean = mean_sum;
    row.realizations = ok;
    row.seed = spec.seed;
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DofSweepRow> dof_sweep(const std::vector<int>& L_grid, int G,
                                   int t) {
  std::vector<DofSweepRow> rows;
  for (int L : L_grid) {
    DofSweepRow row;
    row.L = L;
    // K = L + t suffices: any larger omega admits no stream.
    NetworkConfig cfg;
    cfg.K = L + t;
    cfg.L = L;
    cfg.G = G;
    cfg.t = t;
    cfg.N = std::max(1, cfg.K);
    cfg.M = t;  // K*M/N = t when N = K
    cfg.P_T = 1;
    cfg.N0 = 1;
    row.dof_proposed = dof_max(cfg).dof;
    row.dof_gtl = dof_reference_gtl(L, G, t);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

}  // namespace

std::string results_to_string(const std::vector<ResultRow>& rows,
                              ResultFormat format) {
  std::ostringstream os;
  if (format == ResultFormat::csv) {
    os << "scheme,omega,beta,snr_db,r_sym_mean,r_sym_stderr,sum_rate_mean,n,"
          "seed\n";
    for (const auto& row : rows) {
      os << row.scheme << ',' << row.omega << ',' << row.beta << ','
         << format_double(row.snr_db) << ',' << format_double(row.r_sym_mean)
         << ',' << format_double(row.r_sym_stderr) << ','
         << format_double(row.sum_rate_mean) << ',' << row.realizations << ','
         << row.seed << '\n';
    }
    return os.str();
  }
  json array = json::array();
  for (const auto& row : rows) {
    json obj;
    obj["scheme"] = row.scheme;
    obj["omega"] = row.omega;
    obj["beta"] = row.beta;
    obj["snr_db"] = row.snr_db;
    obj["r_sym_mean"] = row.r_sym_mean;
    obj["r_sym_stderr"] = row.r_sym_stderr;
    obj["sum_rate_mean"] = row.sum_rate_mean;
    obj["n"] = row.realizations;
    obj["seed"] = row.seed;
    array.push_back(obj);
  }
  return array.dump(2) + "\n";
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  ResultFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "'");
  out << results_to_string(rows, format);
  if (!out) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

std::vector<ResultRow> results_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw Error(Errc::io_error, "empty results text");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    ResultRow row;
    std::getline(fields, row.scheme, ',');
    std::getline(fields, token, ',');
    row.omega = std::stoi(token);
    std::getline(fields, token, ',');
    row.beta = std::stoi(token);
    std::getline(fields, token, ',');
    row.snr_db = std::stod(token);
    std::getline(fields, token, ',');
    row.r_sym_mean = std::stod(token);
    std::getline(fields, token, ',');
    row.r_sym_stderr = std::stod(token);
    std::getline(fields, token, ',');
    row.sum_rate_mean = std::stod(token);
    std::getline(fields, token, ',');
    row.realizations = std::stoi(token);
    std::getline(fields, token, ',');
    row.seed = std::stoull(token);
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentSpec spec_from_json(const std::string& text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, std::string("config parse: ") + e.what());
  }
  if (!parsed.contains("schema_version") ||
      parsed["schema_version"].get<int>() != 1)
    throw Error(Errc::invalid_argument, "unsupported config schema_version");

  ExperimentSpec spec;
  spec.config = make_config(
      parsed.at("K").get<int>(), parsed.at("L").get<int>(),
      parsed.at("G").get<int>(), parsed.at("t").get<int>(),
      parsed.at("N").get<int>(), parsed.at("M").get<int>(),
      parsed.value("P_T", 1.0), parsed.value("N0", 1.0));
  if (parsed.contains("scheme"))
    spec.scheme = scheme_from_name(parsed["scheme"].get<std::string>());
  if (parsed.contains("omega") && !parsed["omega"].is_string())
    spec.omega = parsed["omega"].get<int>();
  if (parsed.contains("beta") && !parsed["beta"].is_string())
    spec.beta = parsed["beta"].get<int>();
  if (parsed.contains("snr_db"))
    spec.snr_grid_db = parsed["snr_db"].get<std::vector<double>>();
  spec.realizations = parsed.value("realizations", 50);
  spec.seed = parsed.value("seed", std::uint64_t{1});
  if (parsed.contains("eval_mode")) {
    const auto mode = parsed["eval_mode"].get<std::string>();
    if (mode == "representative") {
      spec.eval_mode = EvalMode::representative;
    } else if (mode == "exhaustive") {
      spec.eval_mode = EvalMode::exhaustive;
    } else {
      throw Error(Errc::invalid_argument, "unknown eval_mode '" + mode + "'");
    }
  }
  spec.threads = parsed.value("threads", 1);
  return spec;
}

std::string spec_to_json(const ExperimentSpec& spec) {
  json obj;
  obj["schema_version"] = 1;
  obj["K"] = spec.config.K;
  obj["L"] = spec.config.L;
  obj["G"] = spec.config.G;
  obj["t"] = spec.config.t;
  obj["N"] = spec.config.N;
  obj["M"] = spec.config.M;
  obj["P_T"] = spec.config.P_T;
  obj["N0"] = spec.config.N0;
  obj["scheme"] = scheme_name(spec.scheme);
  if (spec.omega > 0) obj["omega"] = spec.omega;
  if (spec.beta > 0) obj["beta"] = spec.beta;
  obj["snr_db"] = spec.snr_grid_db;
  obj["realizations"] = spec.realizations;
  obj["seed"] = spec.seed;
  obj["eval_mode"] = spec.eval_mode == EvalMode::representative
                         ? "representative"
                         : "exhaustive";
  obj["threads"] = spec.threads;
  return obj.dump(2) + "\n";
}

}  // namespace mimocc
