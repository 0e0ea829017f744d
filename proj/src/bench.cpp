#include "bench.hpp"

#include <cmath>
#include <cstdio>

#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace tsg {
namespace {

// Distinct stream offsets so noise draws and init draws never overlap.
constexpr std::uint64_t kNoiseStream = 1000;
constexpr std::uint64_t kInitStream = 2000;

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  std_dev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
}

/// Small kick off the truth state: keeps every trial inside the truth's
/// basin so all optimizers chase the same minimum.
ShapeState perturbed_init(const ShapeState& truth, RandomEngine& rng) {
  ShapeState s = truth;
  for (Eigen::Index i = 0; i < s.centers.size(); ++i) {
    s.centers[i] += rng.uniform(-0.01, 0.01);
  }
  for (Eigen::Index i = 0; i < s.thetas.size(); ++i) {
    s.thetas[i] = normalize_angle(s.thetas[i] + rng.uniform(-0.001, 0.001));
  }
  return s;
}

}  // namespace

// Per-optimizer rates: plain GD needs a larger step than the momentum
// variants to clear the slow yaw modes within the iteration budget.
std::vector<BenchEntry> default_bench_entries() {
  return {
      {Optimizer::GD, 1e-3, 2e-3},
      {Optimizer::SGDM, 1e-4, 5e-4},
      {Optimizer::Adam, 2e-3, 2e-3},
  };
}

BenchReport run_bench(const StructureSpec& spec, const BenchOptions& options) {
  if (options.trials < 1) raise(ErrorCode::InvalidArgument, "bench: trials must be >= 1");
  BenchReport report;
  report.truth = equilibrium_oracle(spec, Eigen::VectorXd());
  const Eigen::VectorXd truth_nodes = node_positions(report.truth, spec);

  // Common random numbers: trial t sees the same measurement and the same
  // initialization under every optimizer.
  std::vector<Eigen::VectorXd> trial_phis;
  std::vector<ShapeState> trial_inits;
  NoiseModel noise;
  noise.sigma_phi = options.sigma;
  for (std::size_t t = 0; t < options.trials; ++t) {
    RandomEngine noise_rng(options.seed, kNoiseStream + t);
    trial_phis.push_back(synth_inclinations(report.truth, noise, noise_rng).phis);
    RandomEngine init_rng(options.seed, kInitStream + t);
    trial_inits.push_back(perturbed_init(report.truth, init_rng));
  }

  const std::vector<BenchEntry> entries =
      options.entries.empty() ? default_bench_entries() : options.entries;

  for (const BenchEntry& entry : entries) {
    OptimizerStats stats;
    stats.entry = entry;

    EstimatorConfig config;
    config.optimizer = entry.optimizer;
    config.lr_theta = entry.lr_theta;
    config.lr_p = entry.lr_p;
    config.steps = options.steps;

    double step_time_sum = 0.0;
    double solve_time_sum = 0.0;
    double conv_time_sum = 0.0;
    for (std::size_t t = 0; t < options.trials; ++t) {
      const ShapeEstimate est =
          estimate(trial_phis[t], spec, config, trial_inits[t]);
      stats.maes.push_back(node_mae(est.nodes, truth_nodes, /*aligned=*/true));
      stats.energies.push_back(est.energy);
      solve_time_sum += est.wall_time;
      if (est.iterations > 0) {
        step_time_sum += est.wall_time / static_cast<double>(est.iterations);
      }
      if (est.converged) {
        ++stats.converged;
        conv_time_sum += est.wall_time;
      }
    }

    mean_std(stats.maes, stats.mae_mean, stats.mae_std);
    mean_std(stats.energies, stats.energy_mean, stats.energy_std);
    stats.step_time_mean = step_time_sum / static_cast<double>(options.trials);
    stats.solve_time_mean = solve_time_sum / static_cast<double>(options.trials);
    stats.convergence_time_mean =
        stats.converged > 0 ? conv_time_sum / static_cast<double>(stats.converged) : 0.0;
    report.per_optimizer.push_back(std::move(stats));
  }
  return report;
}

std::string format_bench(const BenchReport& report) {
  std::string out =
      "optimizer  trials  conv  node_mae_mm (mean+-std)  energy_J (mean+-std)  "
      "step_ms  conv_time_ms\n";
  char line[256];
  for (const auto& s : report.per_optimizer) {
    std::snprintf(line, sizeof(line),
                  "%-9s  %6zu  %4zu  %11.3f +- %-8.3f  %9.4f +- %-8.4f  %7.4f  %12.2f\n",
                  optimizer_name(s.entry.optimizer), s.maes.size(), s.converged,
                  1e3 * s.mae_mean, 1e3 * s.mae_std, s.energy_mean, s.energy_std,
                  1e3 * s.step_time_mean, 1e3 * s.convergence_time_mean);
    out += line;
  }
  return out;
}

}  // namespace tsg
