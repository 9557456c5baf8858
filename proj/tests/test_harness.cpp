#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "mimocc/harness.hpp"
#include "mimocc/rate.hpp"

using namespace mimocc;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.config = make_config(5, 3, 2, 1, 5, 1, 1.0, 1.0);
  spec.scheme = Scheme::uc_zf;
  spec.omega = 2;
  spec.beta = 0;
  spec.snr_grid_db = {10.0};
  spec.realizations = 8;
  spec.seed = 42;
  return spec;
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (auto scheme : {Scheme::uc_zf, Scheme::uc_cov, Scheme::uc_lin,
                      Scheme::mc_lin, Scheme::mc_cov})
    CHECK(scheme_from_name(scheme_name(scheme)) == scheme);
  CHECK_THROWS_AS(scheme_from_name("bogus"), Error);
}

TEST_CASE("auto beta follows the curves' parameter pairs") {
  // (L=10, G=3, t=1, K=20), MC-LIN: the largest feasible beta per omega.
  ExperimentSpec spec;
  spec.config = make_config(20, 10, 3, 1, 20, 1, 1.0, 1.0);
  spec.scheme = Scheme::mc_lin;
  const std::vector<std::pair<int, int>> expected = {
      {2, 3}, {3, 2}, {4, 3}, {5, 2}, {6, 2}, {8, 1}, {10, 1}};
  for (const auto& [omega, beta] : expected) {
    spec.omega = omega;
    spec.beta = 0;
    CHECK(resolve_params(spec).beta == beta);
  }
  spec.omega = 7;  // no linearly decodable schedule exists
  CHECK_THROWS_AS(resolve_params(spec), Error);
}

TEST_CASE("identical specs give identical rows and files") {
  const auto spec = small_spec();
  const auto rows1 = run_experiment(spec);
  const auto rows2 = run_experiment(spec);
  REQUIRE(rows1.size() == rows2.size());
  const auto csv1 = results_to_string(rows1, ResultFormat::csv);
  const auto csv2 = results_to_string(rows2, ResultFormat::csv);
  CHECK(csv1 == csv2);
  CHECK(results_to_string(rows1, ResultFormat::json) ==
        results_to_string(rows2, ResultFormat::json));
}

TEST_CASE("worker pool does not change results") {
  auto spec = small_spec();
  spec.realizations = 12;
  const auto serial = run_experiment(spec);
  spec.threads = 4;
  const auto parallel = run_experiment(spec);
  CHECK(results_to_string(serial, ResultFormat::csv) ==
        results_to_string(parallel, ResultFormat::csv));
}

TEST_CASE("representative sampling agrees with exhaustive enumeration") {
  // With i.i.d. channels, evaluating one representative subset per
  // realization is unbiased; compare against the full C(K, omega) loop on a
  // small network within 3 combined standard errors.
  auto spec = small_spec();
  spec.realizations = 60;
  spec.eval_mode = EvalMode::representative;
  const auto rep = run_experiment(spec)[0];
  spec.eval_mode = EvalMode::exhaustive;
  const auto full = run_experiment(spec)[0];
  const double sigma = std::sqrt(rep.r_sym_stderr * rep.r_sym_stderr +
                                 full.r_sym_stderr * full.r_sym_stderr);
  CHECK(std::abs(rep.r_sym_mean - full.r_sym_mean) <= 3.0 * sigma);
}

TEST_CASE("emit_results formatting") {
  const std::string path = "/tmp/mimocc_test_results.csv";

  SUBCASE("empty rows produce a header-only file") {
    emit_results({}, path, ResultFormat::csv);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content ==
          "scheme,omega,beta,snr_db,r_sym_mean,r_sym_stderr,sum_rate_mean,n,"
          "seed\n");
  }

  SUBCASE("round trip preserves 9 significant digits") {
    ResultRow row;
    row.scheme = "UC-ZF";
    row.omega = 3;
    row.beta = 2;
    row.snr_db = 12.3456789;
    row.r_sym_mean = 0.123456789123;
    row.r_sym_stderr = 1.23456789e-5;
    row.sum_rate_mean = 98765.4321;
    row.realizations = 50;
    row.seed = 99;
    emit_results({row}, path, ResultFormat::csv);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    const auto parsed = results_from_csv(content);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].scheme == row.scheme);
    CHECK(parsed[0].r_sym_mean ==
          doctest::Approx(row.r_sym_mean).epsilon(1e-9));
    CHECK(parsed[0].r_sym_stderr ==
          doctest::Approx(row.r_sym_stderr).epsilon(1e-9));
    CHECK(parsed[0].sum_rate_mean ==
          doctest::Approx(row.sum_rate_mean).epsilon(1e-9));
    CHECK(parsed[0].seed == 99);
  }

  std::remove(path.c_str());
}

TEST_CASE("config files parse and serialize") {
  const std::string text = R"({
    "schema_version": 1,
    "K": 10, "L": 4, "G": 2, "t": 1, "N": 10, "M": 1,
    "scheme": "MC-LIN", "omega": 3, "beta": "auto",
    "snr_db": [0, 10, 20], "realizations": 7, "seed": 5,
    "eval_mode": "representative"
  })";
  const auto spec = spec_from_json(text);
  CHECK(spec.config.K == 10);
  CHECK(spec.scheme == Scheme::mc_lin);
  CHECK(spec.omega == 3);
  CHECK(spec.beta == 0);  // "auto"
  CHECK(spec.snr_grid_db == std::vector<double>{0, 10, 20});
  CHECK(spec.realizations == 7);
  CHECK(spec.seed == 5);

  const auto round = spec_from_json(spec_to_json(spec));
  CHECK(round.config.K == spec.config.K);
  CHECK(round.scheme == spec.scheme);
  CHECK(round.omega == spec.omega);
  CHECK(round.snr_grid_db == spec.snr_grid_db);

  CHECK_THROWS_AS(spec_from_json("{\"schema_version\": 2}"), Error);
  CHECK_THROWS_AS(spec_from_json("not json"), Error);
}

TEST_CASE("dof sweep table") {
  const auto rows = dof_sweep({2, 3, 4, 8}, 2, 1);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    NetworkConfig cfg = make_config(row.L + 1, row.L, 2, 1, row.L + 1, 1,
                                    1.0, 1.0);
    CHECK(row.dof_proposed == dof_max(cfg).dof);
    if (row.L % 2 == 0) {
      REQUIRE(row.dof_gtl.has_value());
      CHECK(*row.dof_gtl == 2 + row.L);
      CHECK(row.dof_proposed >= *row.dof_gtl);
    } else {
      CHECK(!row.dof_gtl.has_value());
    }
  }
}

TEST_CASE("MC-LIN delivers at least the UC-LIN symmetric rate") {
  ExperimentSpec spec;
  spec.config = make_config(10, 4, 2, 1, 10, 1, 1.0, 1.0);
  spec.omega = 3;
  spec.snr_grid_db = {10.0};
  spec.realizations = 10;
  spec.seed = 7;
  spec.scheme = Scheme::mc_lin;
  const auto mc = run_experiment(spec)[0];
  spec.scheme = Scheme::uc_lin;
  const auto uc = run_experiment(spec)[0];
  CHECK(mc.r_sym_mean >= uc.r_sym_mean);
}
