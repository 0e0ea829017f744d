#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "simulate.hpp"

namespace tsg {

/// One optimizer entry in a benchmark run. Learning rates are per entry
/// because a normalized-step method and plain descent do not share a
/// meaningful rate scale.
struct BenchEntry {
  Optimizer optimizer = Optimizer::GD;
  double lr_theta = 1e-4;
  double lr_p = 5e-4;
};

struct BenchOptions {
  std::size_t trials = 10;
  double sigma = 0.01;            // phi noise per trial, radians
  std::uint64_t seed = 0;
  std::size_t steps = 5000;       // budget; solves usually stop at tolerance
  std::vector<BenchEntry> entries;  // empty = gd, sgdm, adam defaults
};

std::vector<BenchEntry> default_bench_entries();

struct OptimizerStats {
  BenchEntry entry;
  std::vector<double> maes;       // per-trial aligned node MAE vs truth, m
  std::vector<double> energies;   // per-trial final energy, J
  double mae_mean = 0.0, mae_std = 0.0;
  double energy_mean = 0.0, energy_std = 0.0;
  double step_time_mean = 0.0;    // s per outer step
  double solve_time_mean = 0.0;   // s per trial, converged or not
  double convergence_time_mean = 0.0;  // s, over converged trials only
  std::size_t converged = 0;
};

struct BenchReport {
  ShapeState truth;               // oracle equilibrium all trials measure against
  std::vector<OptimizerStats> per_optimizer;
};

/// Runs every optimizer over the same `trials` draws (identical noisy
/// inclinations and identical near-truth initializations per trial, so the
/// comparison isolates the optimizer) against an oracle ground truth.
BenchReport run_bench(const StructureSpec& spec, const BenchOptions& options);

/// Human-readable table, one row per optimizer.
std::string format_bench(const BenchReport& report);

}  // namespace tsg
