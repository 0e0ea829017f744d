#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "estimator.hpp"
#include "io.hpp"
#include "model.hpp"

namespace tsg {

/// One reference capture: measured inclinations plus the node cloud the
/// fitted stiffness should reproduce.
struct Observation {
  InclinationFrame frame;
  Eigen::VectorXd ref_nodes;  // 3n stacked xyz
};

struct StiffnessBounds {
  double lo = 10.0;   // N/m
  double hi = 200.0;  // N/m
};

struct CalibrationProblem {
  StructureSpec spec;                 // stiffness entries are ignored by the search
  std::vector<Observation> observations;
  StiffnessBounds bounds;
  bool tied = true;                   // one shared stiffness vs per-cable values
  std::size_t budget = 100;           // candidate evaluations
  std::uint64_t seed = 0;
  EstimatorConfig config;             // fixed solve configuration per candidate
};

struct CalibrationResult {
  Eigen::VectorXd stiffness;          // m_s entries (all equal when tied)
  double objective = 0.0;             // mean gauge-aligned node MAE, meters
  bool scale_unidentifiable = false;  // all rest lengths zero: scale is gauge
  std::size_t evaluations = 0;
};

/// Objective of one stiffness candidate: every observation is solved from a
/// warm start at its reference cloud (no randomness, so re-evaluation is
/// exact) and scored by gauge-aligned node MAE; degenerate solves
/// disqualify the candidate.
double evaluate_stiffness(const CalibrationProblem& problem,
                          const Eigen::VectorXd& stiffness);

/// Seeded random search over the stiffness space (log-uniform draws, then a
/// shrinking local refinement around the incumbent), minimizing
/// evaluate_stiffness. Ties break toward the earlier candidate. Raises
/// Unidentifiable for a tied search when every rest length is zero, since
/// scaling all stiffnesses then rescales the energy without moving its
/// minimizers.
CalibrationResult fit_stiffness(const CalibrationProblem& problem);

}  // namespace tsg
