// Command-line front end: DoF tables, schedule inspection, Monte Carlo rate
// sweeps, and a self-check suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mimocc/beamform.hpp"
#include "mimocc/covdesign.hpp"
#include "mimocc/dofopt.hpp"
#include "mimocc/harness.hpp"
#include "mimocc/rate.hpp"

namespace {

using namespace mimocc;

struct CommonOpts {
  std::string config_path;
  int K = 0, L = 0, G = 0, t = -1, N = 0, M = -1;
  std::uint64_t seed = 1;
  bool seed_set = false;
};

void add_network_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON experiment config");
  cmd->add_option("-K,--users", opts.K, "user count");
  cmd->add_option("-L,--tx-dims", opts.L, "transmit spatial dimensions");
  cmd->add_option("-G,--rx-dims", opts.G, "receive spatial dimensions");
  cmd->add_option("-t,--cc-gain", opts.t, "coded caching gain");
  cmd->add_option("-N,--library", opts.N, "library size (default K)");
  cmd->add_option("-M,--cache", opts.M, "cache size (default t*N/K)");
}

ExperimentSpec build_spec(const CommonOpts& opts) {
  ExperimentSpec spec;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw Error(Errc::io_error, "cannot open " + opts.config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    spec = spec_from_json(buffer.str());
  }
  if (opts.K > 0 || opts.config_path.empty()) {
    const int K = opts.K > 0 ? opts.K : spec.config.K;
    const int L = opts.L > 0 ? opts.L : spec.config.L;
    const int G = opts.G > 0 ? opts.G : spec.config.G;
    const int t = opts.t >= 0 ? opts.t : spec.config.t;
    const int N = opts.N > 0 ? opts.N : (spec.config.N > 0 ? spec.config.N : K);
    const int M = opts.M >= 0 ? opts.M
                              : (N > 0 && K > 0 ? t * N / K : 0);
    spec.config = make_config(K, L, G, t, N, M,
                              spec.config.P_T > 0 ? spec.config.P_T : 1.0,
                              spec.config.N0 > 0 ? spec.config.N0 : 1.0);
  }
  if (opts.seed_set) spec.seed = opts.seed;
  return spec;
}

std::vector<double> parse_snr_list(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

int cmd_dof(const CommonOpts& opts, const std::string& l_grid) {
  const ExperimentSpec spec = build_spec(opts);
  if (!l_grid.empty()) {
    std::vector<int> grid;
    std::stringstream ss(l_grid);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stoi(item));
    std::cout << "L,dof_proposed,dof_gt_plus_l\n";
    for (const auto& row : dof_sweep(grid, spec.config.G, spec.config.t)) {
      std::cout << row.L << ',' << row.dof_proposed << ',';
      if (row.dof_gtl)
        std::cout << *row.dof_gtl;
      else
        std::cout << "n/a";
      std::cout << '\n';
    }
    return 0;
  }
  const auto solution = dof_max(spec.config);
  std::cout << "omega_star=" << solution.omega_star
            << " beta_star=" << solution.beta_star << " dof=" << solution.dof
            << "\n\nomega,beta_max,dof\n";
  for (const auto& point : solution.frontier)
    std::cout << point.omega << ',' << point.beta << ',' << point.dof << '\n';
  return 0;
}

int cmd_schedule(const CommonOpts& opts, int omega, int beta) {
  ExperimentSpec spec = build_spec(opts);
  const NetworkConfig& cfg = spec.config;
  if (omega <= 0) omega = dof_max(cfg).omega_star;
  const auto params = base_params(omega, cfg.t);
  std::cout << "omega=" << omega << " t=" << cfg.t
            << " beta0=" << params.beta0 << " B0=" << params.B0
            << " S0=" << params.S0 << '\n';
  const auto feasible = feasible_betas(omega, cfg.t, cfg.L, cfg.G);
  std::cout << "feasible beta (eta, delta):";
  for (const auto& fb : feasible)
    std::cout << ' ' << fb.beta << " (" << fb.eta << ", " << fb.delta << ")";
  std::cout << '\n';
  const auto base = base_schedule(iota_users(omega), cfg.t, spec.seed);
  std::cout << "base schedule:\n" << to_text(base);
  if (beta > 0) {
    for (const auto& fb : feasible) {
      if (fb.beta != beta) continue;
      const auto ext = extended_schedule(base, fb.eta, fb.delta);
      std::cout << "extended schedule (beta=" << beta << "):\n"
                << to_text(ext);
      return 0;
    }
    std::cerr << "beta " << beta << " is not feasible here\n";
    return 1;
  }
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& scheme,
              const std::string& snr, int omega, int beta, int realizations,
              const std::string& out, const std::string& format,
              const std::string& eval_mode, int threads) {
  ExperimentSpec spec = build_spec(opts);
  if (!scheme.empty()) spec.scheme = scheme_from_name(scheme);
  if (!snr.empty()) spec.snr_grid_db = parse_snr_list(snr);
  if (omega > 0) spec.omega = omega;
  if (beta > 0) spec.beta = beta;
  if (realizations > 0) spec.realizations = realizations;
  if (!eval_mode.empty()) {
    if (eval_mode == "representative") {
      spec.eval_mode = EvalMode::representative;
    } else if (eval_mode == "exhaustive") {
      spec.eval_mode = EvalMode::exhaustive;
    } else {
      std::cerr << "unknown eval mode '" << eval_mode << "'\n";
      return 1;
    }
  }
  if (threads > 0) spec.threads = threads;

  const auto rows = run_experiment(spec);
  const ResultFormat fmt =
      format == "json" ? ResultFormat::json : ResultFormat::csv;
  if (out.empty()) {
    std::cout << results_to_string(rows, fmt);
  } else {
    emit_results(rows, out, fmt);
    std::cerr << "wrote " << rows.size() << " rows to " << out << '\n';
  }
  return 0;
}

int check(bool ok, const std::string& name, int& failures) {
  std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << '\n';
  if (!ok) ++failures;
  return ok ? 0 : 1;
}

int cmd_validate(std::uint64_t seed) {
  int failures = 0;

  // Placement combinatorics.
  {
    bool ok = true;
    for (int K = 2; K <= 8 && ok; ++K)
      for (int t = 0; t < K && ok; ++t) {
        const auto cfg = make_config(K, 2, 2, t, K, t, 1.0, 1.0);
        long long total = 0;
        for (int k = 1; k <= K; ++k) {
          const auto cache = cache_contents(cfg, k);
          if (static_cast<long long>(cache.size()) != binomial(K - 1, t - 1))
            ok = false;
          total += static_cast<long long>(cache.size());
        }
        if (total != t * binomial(K, t)) ok = false;
      }
    check(ok, "cache placement counts", failures);
  }

  // DoF bound against the ceil-form feasibility test.
  {
    bool ok = true;
    for (int t = 0; t <= 3 && ok; ++t)
      for (int L = 1; L <= 8 && ok; ++L)
        for (int G = 1; G <= 4 && ok; ++G)
          for (int omega = t + 1; omega <= 8 && ok; ++omega) {
            const long long s = binomial(omega - 1, t);
            int brute = 0;
            for (int b = 1; b <= G; ++b) {
              const long long lhs = (b + s - 1) / s;
              if (lhs <= L - static_cast<long long>(omega - t - 1) * b)
                brute = b;
            }
            if (brute != beta_max(omega, t, L, G)) ok = false;
          }
    check(ok, "beta_max vs exhaustive ceil-form check", failures);
  }

  // Divisibility and base-schedule partitioning.
  {
    bool ok = true;
    for (int omega = 2; omega <= 14 && ok; ++omega)
      for (int t = 0; t <= 4 && ok; ++t) {
        if (omega < t + 1) continue;
        const auto params = base_params(omega, t);
        if (binomial(omega, t + 1) % params.B0 != 0) ok = false;
        if (binomial(omega - 1, t) % params.beta0 != 0) ok = false;
      }
    check(ok, "B0 and beta0 divisibility", failures);

    ok = true;
    for (int omega = 2; omega <= 8 && ok; ++omega)
      for (int t = 1; t <= 3 && ok; ++t) {
        if (omega < t + 1) continue;
        try {
          base_schedule(iota_users(omega), t, seed);
        } catch (const Error&) {
          ok = false;
        }
      }
    check(ok, "base schedule construction, omega in [2,8], t in [1,3]",
          failures);
  }

  // Channel determinism.
  {
    const auto cfg = make_config(4, 4, 2, 1, 4, 1, 1.0, 1.0);
    const auto a = sample_channels(cfg, iota_users(4), seed);
    const auto b = sample_channels(cfg, iota_users(4), seed);
    bool ok = true;
    for (size_t i = 0; i < a.H.size(); ++i)
      if (a.H[i] != b.H[i]) ok = false;
    check(ok, "channel determinism", failures);
  }

  // ZF interference nulling at the (3,2,3) working point.
  {
    const auto cfg = make_config(3, 3, 2, 1, 3, 1, 1.0, 1.0);
    const auto channels = sample_channels(cfg, iota_users(3), seed);
    const auto plan = unicast_plan(iota_users(3), 3, 2, 1);
    const auto rx = rx_bases(channels, 2);
    std::vector<TxBeamformers> W;
    for (int s = 0; s < plan.S; ++s)
      W.push_back(zf_tx_beamformers(channels, plan, s, rx, cfg.P_T));
    const double residual =
        unicast_decode_residual(channels, plan, W, rx, cfg.N0);
    check(residual <= 1e-9, "ZF residual <= 1e-9", failures);
  }

  std::cout << (failures ? "FAILED" : "PASSED") << " (" << failures
            << " failing checks)\n";
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache-aided MIMO content delivery simulator"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string l_grid, scheme, snr, out, format = "csv", eval_mode;
  int omega = 0, beta = 0, realizations = 0, threads = 0;

  auto* dof = app.add_subcommand("dof", "DoF optimizer and frontier");
  add_network_flags(dof, common);
  dof->add_option("--l-grid", l_grid, "comma-separated L values for a sweep");

  auto* schedule =
      app.add_subcommand("schedule", "base/extended multicast schedules");
  add_network_flags(schedule, common);
  schedule->add_option("--omega", omega, "users per transmission");
  schedule->add_option("--beta", beta, "streams per user");
  auto* seed_opt_s = schedule->add_option("--seed", common.seed, "search seed");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo rate sweep");
  add_network_flags(sweep, common);
  sweep->add_option("--scheme", scheme, "UC-ZF|UC-COV|UC-LIN|MC-LIN|MC-COV");
  sweep->add_option("--snr", snr, "comma-separated SNR grid in dB");
  sweep->add_option("--omega", omega, "users per transmission (0 = auto)");
  sweep->add_option("--beta", beta, "streams per user (0 = auto)");
  sweep->add_option("--realizations", realizations, "channel realizations");
  sweep->add_option("--out", out, "output path (default stdout)");
  sweep->add_option("--format", format, "csv or json");
  sweep->add_option("--eval-mode", eval_mode, "representative or exhaustive");
  sweep->add_option("--threads", threads, "worker threads");
  auto* seed_opt_w = sweep->add_option("--seed", common.seed, "random seed");

  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  auto* seed_opt_v =
      validate->add_option("--seed", common.seed, "random seed");

  CLI11_PARSE(app, argc, argv);
  common.seed_set =
      seed_opt_s->count() || seed_opt_w->count() || seed_opt_v->count();

  try {
    if (dof->parsed()) return cmd_dof(common, l_grid);
    if (schedule->parsed()) return cmd_schedule(common, omega, beta);
    if (sweep->parsed())
      return cmd_sweep(common, scheme, snr, omega, beta, realizations, out,
                       format, eval_mode, threads);
    if (validate->parsed()) return cmd_validate(common.seed);
  } catch (const mimocc::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return err.code() == mimocc::Errc::solver_failed ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
