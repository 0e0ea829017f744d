#include "calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace tsg {
namespace {

void check_problem(const CalibrationProblem& problem) {
  if (problem.observations.empty()) {
    raise(ErrorCode::InvalidArgument, "calibration needs at least one observation");
  }
  if (!(problem.bounds.lo > 0.0) || !(problem.bounds.hi > problem.bounds.lo)) {
    raise(ErrorCode::InvalidArgument,
          "stiffness bounds must satisfy 0 < lo < hi");
  }
  if (problem.budget < 1) {
    raise(ErrorCode::InvalidArgument, "calibration budget must be >= 1");
  }
}

StructureSpec with_stiffness(const StructureSpec& spec, const Eigen::VectorXd& k) {
  StructureSpec out = spec;
  for (int i = 0; i < out.cable_count(); ++i) out.cables[i].stiffness = k[i];
  return out;
}

}  // namespace

double evaluate_stiffness(const CalibrationProblem& problem,
                          const Eigen::VectorXd& stiffness) {
  if (stiffness.size() != static_cast<Eigen::Index>(problem.spec.cable_count())) {
    raise(ErrorCode::InvalidArgument, "stiffness arity does not match cable count");
  }
  const StructureSpec candidate = with_stiffness(problem.spec, stiffness);
  double sum = 0.0;
  for (const Observation& obs : problem.observations) {
    ShapeState init = state_from_nodes(obs.ref_nodes, candidate);
    init.phis = obs.frame.phis;
    const ShapeEstimate est =
        estimate(obs.frame.phis, candidate, problem.config, init);
    if (est.degeneracy.degenerate || est.singular_abort) {
      return std::numeric_limits<double>::infinity();
    }
    sum += node_mae(est.nodes, obs.ref_nodes, /*aligned=*/true);
  }
  return sum / static_cast<double>(problem.observations.size());
}

CalibrationResult fit_stiffness(const CalibrationProblem& problem) {
  check_problem(problem);
  const auto m_s = static_cast<Eigen::Index>(problem.spec.cable_count());
  if (m_s == 0) raise(ErrorCode::InvalidArgument, "spec has no cables to calibrate");

  bool all_zero_rest = true;
  for (const auto& c : problem.spec.cables) {
    if (c.rest_length != 0.0) {
      all_zero_rest = false;
      break;
    }
  }
  if (all_zero_rest && problem.tied) {
    raise(ErrorCode::Unidentifiable,
          "all rest lengths are zero: a tied stiffness only rescales the "
          "energy, so its value cannot be identified from shapes");
  }

  const double log_lo = std::log(problem.bounds.lo);
  const double log_hi = std::log(problem.bounds.hi);
  RandomEngine rng(problem.seed);

  // Exploration first, then gaussian refinement around the incumbent with a
  // shrinking width (in log space).
  const std::size_t explore = std::max<std::size_t>(1, (problem.budget * 7) / 10);

  CalibrationResult result;
  result.objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_log;

  for (std::size_t j = 0; j < problem.budget; ++j) {
    Eigen::VectorXd cand_log(problem.tied ? 1 : m_s);
    if (j < explore || best_log.size() == 0) {
      for (Eigen::Index i = 0; i < cand_log.size(); ++i) {
        cand_log[i] = rng.uniform(log_lo, log_hi);
      }
    } else {
      const double width = 0.25 * (log_hi - log_lo) *
                           static_cast<double>(problem.budget - j) /
                           static_cast<double>(problem.budget - explore);
      for (Eigen::Index i = 0; i < cand_log.size(); ++i) {
        cand_log[i] = std::clamp(best_log[i] + width * rng.normal(), log_lo, log_hi);
      }
    }

    Eigen::VectorXd k(m_s);
    for (Eigen::Index i = 0; i < m_s; ++i) {
      k[i] = std::exp(problem.tied ? cand_log[0] : cand_log[i]);
    }
    const double objective = evaluate_stiffness(problem, k);
    ++result.evaluations;
    if (objective < result.objective) {
      result.objective = objective;
      result.stiffness = k;
      best_log = cand_log;
    }
  }

  if (!std::isfinite(result.objective)) {
    raise(ErrorCode::Degenerate,
          "every stiffness candidate produced a degenerate estimate");
  }
  result.scale_unidentifiable = all_zero_rest;
  return result;
}

}  // namespace tsg
