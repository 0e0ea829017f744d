#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "energy.hpp"
#include "io.hpp"
#include "kinematics.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "stream.hpp"

namespace tsg {

enum class Optimizer { GD, SGDM, Adam };

Optimizer optimizer_from_name(const std::string& name);
const char* optimizer_name(Optimizer o);

struct EstimatorConfig {
  std::size_t steps = 300;        // outer iterations per solve
  double lr_theta = 1e-4;         // alpha
  double lr_p = 5e-4;             // beta
  std::size_t inner_theta = 1;    // theta updates per outer step
  std::size_t inner_p = 1;        // p updates per outer step
  Optimizer optimizer = Optimizer::GD;
  double momentum = 0.9;          // SGDM
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double grad_tol_p = 1e-3;       // N
  double grad_tol_theta = 1e-3;   // N*m
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  std::size_t warm_steps = 50;    // per-frame budget after the first solve
};

void check_config(const EstimatorConfig& config);

/// Per-solve optimizer state: SGDM velocity doubles as Adam's first moment.
struct OptimizerMemory {
  Eigen::VectorXd vel_p, vel_theta;
  Eigen::VectorXd sq_p, sq_theta;     // Adam second moments
  std::uint64_t t_p = 0, t_theta = 0; // update counts for bias correction
  void reset(std::size_t strut_count);
};

struct Degeneracy {
  bool degenerate = false;
  std::string reason;
};

struct ShapeEstimate {
  ShapeState state;
  Eigen::VectorXd nodes;              // node_positions(state), cached
  std::vector<double> energy_trace;   // initial energy plus one entry per step
  double grad_norm_p = 0.0;
  double grad_norm_theta = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  Degeneracy degeneracy;
  bool singular_abort = false;        // a step hit a zero-length taut cable
  double wall_time = 0.0;             // seconds, whole estimate() call
  double timestamp = 0.0;             // copied from the input frame when tracking
  int restart_index = -1;             // winning restart; -1 when init was given
  double energy = 0.0;                // final total energy
};

/// Collapse guard: flags states whose struts have effectively merged
/// (min pairwise center distance under 10% of the longest strut) and, for
/// all-zero rest lengths, the spurious zero-energy minimum.
Degeneracy detect_degenerate(const ShapeState& state, const StructureSpec& spec);
Degeneracy detect_degenerate(const ShapeEstimate& estimate, const StructureSpec& spec);

/// One outer step: inner_theta theta-updates then inner_p p-updates,
/// gradients recomputed before each inner update. On a singular
/// configuration the error propagates and state/memory are left unchanged.
void step(ShapeState& state, const StructureSpec& spec, const EstimatorConfig& config,
          OptimizerMemory& memory);

/// Random initialization: centers uniform in the cube of half-width
/// 2*max(L_i) around the origin, yaws uniform over the circle, inclinations
/// fixed to the measurement.
ShapeState random_init(const Eigen::VectorXd& phis, const StructureSpec& spec,
                       RandomEngine& rng);

/// Full solve. Without init: `restarts` seeded random starts, returns the
/// lowest-energy non-degenerate result (ties to the lowest restart index),
/// raising Degenerate if every restart collapses. With init: single solve
/// from there, degenerate results returned flagged rather than raised.
ShapeEstimate estimate(const Eigen::VectorXd& phis, const StructureSpec& spec,
                       const EstimatorConfig& config = {},
                       const std::optional<ShapeState>& init = std::nullopt);

/// Streaming estimation: multi-start on the first frame, warm starts with a
/// reduced step budget afterwards. Supports both a pull style (submit each
/// line, get the estimate) and a threaded style (ingest_line from a reader
/// thread, poll from the solver thread via a latest-value slot).
class Tracker {
 public:
  Tracker(StructureSpec spec, EstimatorConfig config);

  /// Pull mode. Returns the estimate, or nullopt for a rejected line
  /// (malformed, wrong arity, phi range, out-of-order timestamp).
  std::optional<ShapeEstimate> submit_line(const std::string& line);
  std::optional<ShapeEstimate> submit_frame(const InclinationFrame& frame);

  /// Threaded mode. ingest_line never blocks on the solver; poll solves the
  /// newest pending frame and counts how many it skipped to get there.
  void ingest_line(const std::string& line);
  std::optional<ShapeEstimate> poll();

  std::uint64_t rejects() const { return rejects_.load(); }
  std::uint64_t skips() const { return skips_; }
  const StructureSpec& spec() const { return spec_; }

 private:
  std::optional<ShapeEstimate> solve(const InclinationFrame& frame);

  StructureSpec spec_;
  EstimatorConfig config_;
  std::optional<ShapeState> last_state_;
  double last_timestamp_ = 0.0;
  bool first_done_ = false;
  std::atomic<std::uint64_t> rejects_{0};
  std::uint64_t skips_ = 0;
  std::uint64_t taken_seq_ = 0;  // slot sequence already consumed
  LatestSlot<InclinationFrame> slot_;
};

}  // namespace tsg
