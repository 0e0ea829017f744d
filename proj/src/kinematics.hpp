#pragma once

#include <Eigen/Dense>

#include "model.hpp"

namespace tsg {

/// Decision variables of one structure: strut centers p (stacked xyz) and yaw
/// angles theta, plus the measured inclinations phi which are inputs, never
/// optimized.
struct ShapeState {
  Eigen::VectorXd centers;  // 3 * m_b
  Eigen::VectorXd thetas;   // m_b
  Eigen::VectorXd phis;     // m_b

  int strut_count() const { return static_cast<int>(thetas.size()); }

  Eigen::Vector3d center(int i) const { return centers.segment<3>(3 * i); }
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Spherical-to-Cartesian strut axis:
/// (sin phi cos theta, sin phi sin theta, cos phi). phi must lie in [0, pi].
Eigen::Vector3d orientation_from_angles(double phi, double theta);

/// d(orientation)/d(theta) = (-sin phi sin theta, sin phi cos theta, 0).
/// Vanishes identically at the poles, so a strut with phi = 0 cannot change
/// its yaw through gradient steps; the stored theta is simply inert there.
Eigen::Vector3d orientation_jacobian_theta(double phi, double theta);

/// Inclination of a unit axis: arccos(q_z) in [0, pi]. Rejects inputs whose
/// norm deviates from 1 by more than 1e-9.
double inclination_of(const Eigen::Vector3d& q);

/// Unit axis of strut i in the given state.
Eigen::Vector3d strut_orientation(const ShapeState& state, int i);

/// Stacked node positions: node i = p_i + (L_i/2) q_i and
/// node i + m_b = p_i - (L_i/2) q_i.
Eigen::VectorXd node_positions(const ShapeState& state, const StructureSpec& spec);

/// Inverse of node_positions for a (possibly noisy) node cloud: centers are
/// the endpoint midpoints, angles come from the normalized endpoint
/// difference. A strut whose endpoints coincide keeps theta = 0.
ShapeState state_from_nodes(const Eigen::VectorXd& nodes, const StructureSpec& spec);

/// Checks that the state dimensions match the spec; throws InvalidArgument
/// otherwise.
void check_state_dims(const ShapeState& state, const StructureSpec& spec);

}  // namespace tsg
