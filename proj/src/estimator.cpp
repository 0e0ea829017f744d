#include "estimator.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace tsg {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCollapseFraction = 0.1;   // of the longest strut
constexpr double kZeroEnergyFloor = 1e-9;   // J, b = 0 collapse detector

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_phis(const Eigen::VectorXd& phis, const StructureSpec& spec) {
  if (phis.size() != static_cast<Eigen::Index>(spec.strut_count())) {
    raise(ErrorCode::InvalidArgument, "estimate: phi arity does not match strut count");
  }
  for (Eigen::Index i = 0; i < phis.size(); ++i) {
    if (!(phis[i] >= 0.0 && phis[i] <= kPi)) {
      raise(ErrorCode::InvalidArgument,
            "estimate: phi[" + std::to_string(i) + "] outside [0, pi]");
    }
  }
}

/// Optimizer update for one parameter block; g is the fresh gradient.
void apply_update(Eigen::VectorXd& values, const Eigen::VectorXd& g, double lr,
                  const EstimatorConfig& cfg, Eigen::VectorXd& vel, Eigen::VectorXd& sq,
                  std::uint64_t& t) {
  switch (cfg.optimizer) {
    case Optimizer::GD:
      values -= lr * g;
      break;
    case Optimizer::SGDM:
      vel = cfg.momentum * vel + g;
      values -= lr * vel;
      break;
    case Optimizer::Adam: {
      ++t;
      vel = cfg.adam_beta1 * vel + (1.0 - cfg.adam_beta1) * g;
      sq = cfg.adam_beta2 * sq + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
      values -= (lr * (vel / c1).array() / ((sq / c2).array().sqrt() + cfg.adam_epsilon))
                    .matrix();
      break;
    }
  }
}

/// One outer step on scratch copies, committed only on success, so a
/// singular-configuration error leaves the caller's state untouched.
/// `entry` optionally carries the gradient already evaluated at the input
/// state (the convergence check computes it anyway).
void run_step(ShapeState& state, const StructureSpec& spec, const EstimatorConfig& cfg,
              OptimizerMemory& memory, const Gradients* entry) {
  ShapeState s = state;
  OptimizerMemory mem = memory;

  for (std::size_t j = 0; j < cfg.inner_theta; ++j) {
    const Gradients g =
        (j == 0 && entry != nullptr) ? *entry : energy_gradients(s, spec);
    apply_update(s.thetas, g.theta, cfg.lr_theta, cfg, mem.vel_theta, mem.sq_theta,
                 mem.t_theta);
  }
  for (std::size_t j = 0; j < cfg.inner_p; ++j) {
    const Gradients g = energy_gradients(s, spec);
    apply_update(s.centers, g.p, cfg.lr_p, cfg, mem.vel_p, mem.sq_p, mem.t_p);
  }
  for (Eigen::Index i = 0; i < s.thetas.size(); ++i) {
    s.thetas[i] = normalize_angle(s.thetas[i]);
  }

  state = std::move(s);
  memory = std::move(mem);
}

/// Budgeted descent from a fixed initialization; never throws for
/// singular configurations (they flag the estimate instead).
ShapeEstimate solve_from(const ShapeState& init, const Eigen::VectorXd& phis,
                         const StructureSpec& spec, const EstimatorConfig& cfg,
                         std::size_t budget) {
  ShapeEstimate est;
  est.state = init;
  est.state.phis = phis;

  OptimizerMemory memory;
  memory.reset(spec.strut_count());

  est.energy_trace.reserve(budget + 1);
  est.energy_trace.push_back(total_energy(est.state, spec).total);

  for (std::size_t iter = 0;; ++iter) {
    Gradients g;
    try {
      g = energy_gradients(est.state, spec);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularConfiguration) throw;
      est.singular_abort = true;
      break;
    }
    est.grad_norm_p = g.p.norm();
    est.grad_norm_theta = g.theta.norm();
    if (est.grad_norm_p <= cfg.grad_tol_p && est.grad_norm_theta <= cfg.grad_tol_theta) {
      est.converged = true;
      break;
    }
    if (iter == budget) break;

    try {
      run_step(est.state, spec, cfg, memory, &g);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularConfiguration) throw;
      est.singular_abort = true;
      break;
    }
    est.energy_trace.push_back(total_energy(est.state, spec).total);
  }

  est.iterations = est.energy_trace.size() - 1;
  est.energy = est.energy_trace.back();
  est.nodes = node_positions(est.state, spec);
  est.degeneracy = detect_degenerate(est.state, spec);
  return est;
}

}  // namespace

Optimizer optimizer_from_name(const std::string& name) {
  if (name == "gd") return Optimizer::GD;
  if (name == "sgdm") return Optimizer::SGDM;
  if (name == "adam") return Optimizer::Adam;
  raise(ErrorCode::InvalidArgument,
        "unknown optimizer '" + name + "' (expected gd|sgdm|adam)");
}

const char* optimizer_name(Optimizer o) {
  switch (o) {
    case Optimizer::GD: return "gd";
    case Optimizer::SGDM: return "sgdm";
    case Optimizer::Adam: return "adam";
  }
  return "?";
}

void check_config(const EstimatorConfig& config) {
  if (!(config.lr_theta > 0.0) || !(config.lr_p > 0.0)) {
    raise(ErrorCode::InvalidArgument, "config: learning rates must be > 0");
  }
  if (config.steps < 1) raise(ErrorCode::InvalidArgument, "config: steps must be >= 1");
  if (config.restarts < 1) {
    raise(ErrorCode::InvalidArgument, "config: restarts must be >= 1");
  }
  if (config.inner_theta < 1 || config.inner_p < 1) {
    raise(ErrorCode::InvalidArgument, "config: inner iteration counts must be >= 1");
  }
  if (!(config.grad_tol_p > 0.0) || !(config.grad_tol_theta > 0.0)) {
    raise(ErrorCode::InvalidArgument, "config: gradient tolerances must be > 0");
  }
}

void OptimizerMemory::reset(std::size_t strut_count) {
  const auto m = static_cast<Eigen::Index>(strut_count);
  vel_p = Eigen::VectorXd::Zero(3 * m);
  vel_theta = Eigen::VectorXd::Zero(m);
  sq_p = Eigen::VectorXd::Zero(3 * m);
  sq_theta = Eigen::VectorXd::Zero(m);
  t_p = t_theta = 0;
}

Degeneracy detect_degenerate(const ShapeState& state, const StructureSpec& spec) {
  check_state_dims(state, spec);
  Degeneracy out;
  const int m = spec.strut_count();
  double max_len = 0.0;
  for (double L : spec.strut_lengths) max_len = std::max(max_len, L);

  for (int i = 0; i + 1 < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double d = (state.center(i) - state.center(j)).norm();
      if (d < kCollapseFraction * max_len) {
        out.degenerate = true;
        out.reason = "collapse: centers of struts " + std::to_string(i) + " and " +
                     std::to_string(j) + " are " + std::to_string(d) + " m apart";
        return out;
      }
    }
  }

  if (!spec.cables.empty()) {
    bool all_zero_rest = true;
    for (const auto& c : spec.cables) {
      if (c.rest_length != 0.0) {
        all_zero_rest = false;
        break;
      }
    }
    if (all_zero_rest) {
      const double e = total_energy(state, spec).total;
      if (e < kZeroEnergyFloor) {
        out.degenerate = true;
        out.reason = "zero energy: " + std::to_string(e) + " J with all rest lengths 0";
        return out;
      }
    }
  }
  return out;
}

Degeneracy detect_degenerate(const ShapeEstimate& estimate, const StructureSpec& spec) {
  return detect_degenerate(estimate.state, spec);
}

void step(ShapeState& state, const StructureSpec& spec, const EstimatorConfig& config,
          OptimizerMemory& memory) {
  check_config(config);
  check_state_dims(state, spec);
  run_step(state, spec, config, memory, nullptr);
}

ShapeState random_init(const Eigen::VectorXd& phis, const StructureSpec& spec,
                       RandomEngine& rng) {
  const auto m = static_cast<Eigen::Index>(spec.strut_count());
  double max_len = 0.0;
  for (double L : spec.strut_lengths) max_len = std::max(max_len, L);
  const double half = 2.0 * max_len;

  ShapeState s;
  s.centers.resize(3 * m);
  s.thetas.resize(m);
  s.phis = phis;
  for (Eigen::Index i = 0; i < 3 * m; ++i) s.centers[i] = rng.uniform(-half, half);
  for (Eigen::Index i = 0; i < m; ++i) s.thetas[i] = normalize_angle(rng.uniform(-kPi, kPi));
  return s;
}

ShapeEstimate estimate(const Eigen::VectorXd& phis, const StructureSpec& spec,
                       const EstimatorConfig& config,
                       const std::optional<ShapeState>& init) {
  const auto t0 = std::chrono::steady_clock::now();
  check_config(config);
  build_connectivity(spec);  // surfaces invalid specs with the violation list
  check_phis(phis, spec);

  if (init.has_value()) {
    check_state_dims(*init, spec);
    ShapeEstimate est = solve_from(*init, phis, spec, config, config.steps);
    est.wall_time = seconds_since(t0);
    return est;
  }

  std::optional<ShapeEstimate> best;
  std::string first_reason;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    RandomEngine rng(config.seed, r);
    const ShapeState start = random_init(phis, spec, rng);
    ShapeEstimate est = solve_from(start, phis, spec, config, config.steps);
    est.restart_index = static_cast<int>(r);
    if (est.degeneracy.degenerate) {
      if (first_reason.empty()) first_reason = est.degeneracy.reason;
      continue;
    }
    if (!best || est.energy < best->energy) best = std::move(est);
  }
  if (!best) {
    raise(ErrorCode::Degenerate,
          "all " + std::to_string(config.restarts) +
              " restarts converged to degenerate states (first: " + first_reason + ")");
  }
  best->wall_time = seconds_since(t0);
  return *best;
}

Tracker::Tracker(StructureSpec spec, EstimatorConfig config)
    : spec_(std::move(spec)), config_(config) {
  check_config(config_);
  build_connectivity(spec_);
}

std::optional<ShapeEstimate> Tracker::submit_line(const std::string& line) {
  InclinationFrame frame;
  try {
    frame = parse_frame(line, spec_.strut_count());
  } catch (const Error&) {
    rejects_.fetch_add(1);
    return std::nullopt;
  }
  return submit_frame(frame);
}

std::optional<ShapeEstimate> Tracker::submit_frame(const InclinationFrame& frame) {
  return solve(frame);
}

void Tracker::ingest_line(const std::string& line) {
  InclinationFrame frame;
  try {
    frame = parse_frame(line, spec_.strut_count());
  } catch (const Error&) {
    rejects_.fetch_add(1);
    return;
  }
  slot_.put(frame);
}

std::optional<ShapeEstimate> Tracker::poll() {
  const std::uint64_t before = taken_seq_;
  const auto frame = slot_.take(taken_seq_);
  if (!frame) return std::nullopt;
  if (taken_seq_ > before + 1) skips_ += taken_seq_ - before - 1;
  return solve(*frame);
}

std::optional<ShapeEstimate> Tracker::solve(const InclinationFrame& frame) {
  if (first_done_ && frame.timestamp < last_timestamp_) {
    rejects_.fetch_add(1);
    return std::nullopt;
  }

  ShapeEstimate est;
  if (!first_done_) {
    est = estimate(frame.phis, spec_, config_);
  } else {
    EstimatorConfig warm = config_;
    warm.steps = config_.warm_steps;
    est = estimate(frame.phis, spec_, warm, last_state_);
  }
  first_done_ = true;
  last_timestamp_ = frame.timestamp;
  last_state_ = est.state;
  est.timestamp = frame.timestamp;
  return est;
}

}  // namespace tsg
