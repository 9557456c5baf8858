#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mimocc/dofopt.hpp"
#include "mimocc/model.hpp"

namespace mimocc {

// Delivery scheme x beamforming design, named as in the experiment tables:
// UC = unicast scheduling, MC = full multicast scheduling; ZF = zero forcing,
// LIN = optimized linear beamforming, COV = covariance design.
enum class Scheme { uc_zf, uc_cov, uc_lin, mc_lin, mc_cov };

Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme scheme);

enum class EvalMode { representative, exhaustive };

struct ExperimentSpec {
  NetworkConfig config;
  Scheme scheme = Scheme::mc_lin;
  int omega = 0;  // 0 = auto (DoF-optimal omega)
  int beta = 0;   // 0 = auto (DoF-optimal for UC, largest feasible for MC)
  std::vector<double> snr_grid_db;  // empty = single point at config P_T
  int realizations = 50;
  std::uint64_t seed = 1;
  EvalMode eval_mode = EvalMode::representative;
  int threads = 1;
};

struct ResultRow {
  std::string scheme;
  int omega = 0;
  int beta = 0;
  double snr_db = 0;
  double r_sym_mean = 0;
  double r_sym_stderr = 0;
  double sum_rate_mean = 0;
  int realizations = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0;  // informational; never serialized
};

// The resolved delivery parameters an experiment actually runs with.
struct ResolvedParams {
  int omega = 0;
  int beta = 0;
  int eta = 0;    // multicast only
  int delta = 0;  // multicast only
};
ResolvedParams resolve_params(const ExperimentSpec& spec);

// Monte Carlo sweep: for every SNR point and realization, samples channels,
// builds the scheme's plan/schedule, optimizes, and accumulates the symmetric
// rate. Realizations are sub-seeded, so thread count and execution order do
// not change the output. Per-realization failures are recorded and skipped;
// more than 20% failures aborts the run.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

struct DofSweepRow {
  int L = 0;
  long long dof_proposed = 0;
  std::optional<long long> dof_gtl;
};
std::vector<DofSweepRow> dof_sweep(const std::vector<int>& L_grid, int G,
                                   int t);

enum class ResultFormat { csv, json };
void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  ResultFormat format);
std::string results_to_string(const std::vector<ResultRow>& rows,
                              ResultFormat format);
std::vector<ResultRow> results_from_csv(const std::string& text);

// Experiment configuration file: JSON with a schema_version field.
ExperimentSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ExperimentSpec& spec);

}  // namespace mimocc
