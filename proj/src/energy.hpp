#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kinematics.hpp"
#include "model.hpp"

namespace tsg {

/// Per-cable breakdown of the elastic energy.
struct EnergyReport {
  double total = 0.0;             // J, sum of per_cable in cable order
  Eigen::VectorXd per_cable;      // J
  Eigen::VectorXd cable_lengths;  // m
};

/// Difference vector of each cable, entry k = n_{node_a(k)} - n_{node_b(k)}.
std::vector<Eigen::Vector3d> cable_vectors(const Eigen::VectorXd& nodes,
                                           const StructureSpec& spec);

/// Force K (|d| - b) d/|d| of cable k at member vector d. Raises
/// SingularConfiguration when a cable with b > 0 has |d| ~ 0; the b = 0 case
/// is exactly K d for every d.
Eigen::Vector3d cable_force(const CableSpec& c, const Eigen::Vector3d& d, int k);

/// Total elastic energy 1/2 K_k (|d_k| - b_k)^2 summed over cables, with the
/// per-cable terms and current lengths.
EnergyReport total_energy(const ShapeState& state, const StructureSpec& spec);

/// Energy evaluated directly from a node vector (no state needed). Used by
/// the quadratic-form identities and by callers that already hold nodes.
EnergyReport energy_of_nodes(const Eigen::VectorXd& nodes, const StructureSpec& spec);

/// Analytic gradient of the energy with respect to the stacked strut centers.
/// With zero rest lengths this is the incidence-transpose accumulation of
/// K_k d_k applied per axis; with b_k > 0 the per-cable factor becomes
/// K_k (1 - b_k / |d_k|). A cable of zero current length with b_k > 0 has no
/// defined gradient direction and raises SingularConfiguration.
Eigen::VectorXd grad_p(const ShapeState& state, const StructureSpec& spec);

/// Analytic gradient with respect to the yaw angles, via the chain rule
/// through the orientation Jacobian. Same singular rule as grad_p.
Eigen::VectorXd grad_theta(const ShapeState& state, const StructureSpec& spec);

/// Both gradients from one pass over the cables.
struct Gradients {
  Eigen::VectorXd p;      // 3 * m_b
  Eigen::VectorXd theta;  // m_b
};
Gradients energy_gradients(const ShapeState& state, const StructureSpec& spec);

}  // namespace tsg
