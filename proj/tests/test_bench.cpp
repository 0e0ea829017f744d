#include "doctest.h"

#include <cmath>
#include <string>

#include "bench.hpp"
#include "error.hpp"
#include "model.hpp"
#include "simulate.hpp"
#include "test_util.hpp"

using namespace tsg;

TEST_SUITE("bench") {

TEST_CASE("default entries cover the three optimizers") {
  const std::vector<BenchEntry> entries = default_bench_entries();
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].optimizer == Optimizer::GD);
  CHECK(entries[1].optimizer == Optimizer::SGDM);
  CHECK(entries[2].optimizer == Optimizer::Adam);
  for (const BenchEntry& e : entries) {
    CHECK(e.lr_theta > 0.0);
    CHECK(e.lr_p > 0.0);
  }
}

TEST_CASE("a small run produces sane statistics for every optimizer") {
  BenchOptions options;
  options.trials = 3;
  options.steps = 3000;
  options.seed = 2;
  const BenchReport report = run_bench(taut_prism(), options);

  REQUIRE(report.per_optimizer.size() == 3);
  CHECK(report.truth.strut_count() == 4);
  for (const OptimizerStats& stats : report.per_optimizer) {
    REQUIRE(stats.maes.size() == options.trials);
    REQUIRE(stats.energies.size() == options.trials);
    for (double mae : stats.maes) {
      CHECK(std::isfinite(mae));
      CHECK(mae >= 0.0);
      CHECK(mae < 0.05);  // near-truth inits stay in the basin
    }
    CHECK(stats.mae_mean >= 0.0);
    CHECK(stats.mae_std >= 0.0);
    CHECK(stats.energy_mean > 0.0);  // the taut prism is prestressed
    CHECK(stats.step_time_mean > 0.0);
    CHECK(stats.step_time_mean < 1e-3);
    CHECK(stats.solve_time_mean > 0.0);
    if (stats.converged > 0) {
      CHECK(stats.convergence_time_mean > 0.0);
    }
    CHECK(stats.converged <= options.trials);
  }
}

TEST_CASE("reports are deterministic per seed up to timing") {
  BenchOptions options;
  options.trials = 2;
  options.steps = 1500;
  options.seed = 4;
  const BenchReport a = run_bench(taut_prism(), options);
  const BenchReport b = run_bench(taut_prism(), options);
  REQUIRE(a.per_optimizer.size() == b.per_optimizer.size());
  for (std::size_t i = 0; i < a.per_optimizer.size(); ++i) {
    CHECK(a.per_optimizer[i].mae_mean == b.per_optimizer[i].mae_mean);
    CHECK(a.per_optimizer[i].energy_mean == b.per_optimizer[i].energy_mean);
    CHECK(a.per_optimizer[i].converged == b.per_optimizer[i].converged);
  }
}

TEST_CASE("a custom entry list restricts the run") {
  BenchOptions options;
  options.trials = 2;
  options.steps = 1000;
  options.entries.push_back(BenchEntry{Optimizer::Adam, 2e-3, 2e-3});
  const BenchReport report = run_bench(taut_prism(), options);
  REQUIRE(report.per_optimizer.size() == 1);
  CHECK(report.per_optimizer[0].entry.optimizer == Optimizer::Adam);
}

TEST_CASE("the table names every optimizer row") {
  BenchOptions options;
  options.trials = 2;
  options.steps = 1000;
  const BenchReport report = run_bench(taut_prism(), options);
  const std::string table = format_bench(report);
  CHECK(table.find("gd") != std::string::npos);
  CHECK(table.find("sgdm") != std::string::npos);
  CHECK(table.find("adam") != std::string::npos);
  CHECK(table.find("mae") != std::string::npos);
}

TEST_CASE("option validation") {
  BenchOptions options;
  options.trials = 0;
  CHECK_THROWS_AS(run_bench(taut_prism(), options), Error);
  options.trials = 2;
  options.sigma = -0.5;
  CHECK_THROWS_AS(run_bench(taut_prism(), options), Error);
}

}  // TEST_SUITE
