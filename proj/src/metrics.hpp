#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kinematics.hpp"

namespace tsg {

/// Element of the energy's symmetry group: a rotation about the gravity axis
/// followed by a translation. Applying it to a point x gives Rz(yaw) x + t.
struct GaugeTransform {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

/// Least-squares gauge registration: the transform that maps `est` onto `ref`
/// minimizing the summed squared node distances, restricted to translation
/// plus rotation about gravity. Yaw comes in closed form from the planar
/// cross/dot correlation of the centroid-removed horizontal coordinates; a
/// degenerate horizontal spread yields yaw 0.
GaugeTransform align(const Eigen::VectorXd& est_nodes, const Eigen::VectorXd& ref_nodes);

/// Applies the transform to every point of a stacked xyz cloud.
Eigen::VectorXd apply_gauge(const GaugeTransform& g, const Eigen::VectorXd& nodes);

/// Mean Euclidean point error between two equally-sized clouds, optionally
/// after gauge alignment. Works for node clouds and strut-center clouds alike.
double node_mae(const Eigen::VectorXd& est_nodes, const Eigen::VectorXd& ref_nodes,
                bool aligned);

/// Midpoints of each strut's two nodes, as a stacked 3*m_b vector.
Eigen::VectorXd strut_centers_of(const Eigen::VectorXd& nodes);

/// One row of the per-strut angle comparison. `percent` is
/// |actual - estimated| / |actual| * 100 and is absent when |actual| falls
/// below 0.1 rad, where the ratio stops meaning anything.
struct AngleRecord {
  double actual = 0.0;
  double estimated = 0.0;
  std::optional<double> percent;
};

struct AngleErrors {
  std::vector<AngleRecord> yaw;          // theta, after removing the yaw gauge
  std::vector<AngleRecord> inclination;  // phi
};

/// Per-strut angle comparison between an estimated and a reference state.
/// The estimate's yaws are first shifted by the gauge yaw that best aligns
/// the two node clouds, so only non-gauge yaw error remains.
AngleErrors angle_errors(const ShapeState& est, const ShapeState& ref,
                         const StructureSpec& spec);

}  // namespace tsg
