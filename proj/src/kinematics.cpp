#include "kinematics.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace tsg {

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * M_PI);  // lands in [-pi, pi]
  if (r <= -M_PI) r = M_PI;
  return r;
}

static void check_phi(double phi) {
  if (!(phi >= 0.0 && phi <= M_PI)) {
    std::ostringstream os;
    os << "inclination " << phi << " outside [0, pi]";
    raise(ErrorCode::InvalidArgument, os.str());
  }
}

Eigen::Vector3d orientation_from_angles(double phi, double theta) {
  check_phi(phi);
  const double s = std::sin(phi);
  return {s * std::cos(theta), s * std::sin(theta), std::cos(phi)};
}

Eigen::Vector3d orientation_jacobian_theta(double phi, double theta) {
  check_phi(phi);
  const double s = std::sin(phi);
  return {-s * std::sin(theta), s * std::cos(theta), 0.0};
}

double inclination_of(const Eigen::Vector3d& q) {
  if (std::abs(q.norm() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "axis is not a unit vector (norm " << q.norm() << ")";
    raise(ErrorCode::InvalidArgument, os.str());
  }
  return std::acos(std::clamp(q.z(), -1.0, 1.0));
}

Eigen::Vector3d strut_orientation(const ShapeState& state, int i) {
  return orientation_from_angles(state.phis[i], state.thetas[i]);
}

void check_state_dims(const ShapeState& state, const StructureSpec& spec) {
  const int m = spec.strut_count();
  if (state.thetas.size() != m || state.phis.size() != m ||
      state.centers.size() != 3 * m) {
    std::ostringstream os;
    os << "state dimensions (" << state.centers.size() << ", "
       << state.thetas.size() << ", " << state.phis.size()
       << ") do not match a " << m << "-strut structure";
    raise(ErrorCode::InvalidArgument, os.str());
  }
}

Eigen::VectorXd node_positions(const ShapeState& state, const StructureSpec& spec) {
  check_state_dims(state, spec);
  const int m = spec.strut_count();
  Eigen::VectorXd nodes(6 * m);
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector3d p = state.center(i);
    const Eigen::Vector3d half = 0.5 * spec.strut_lengths[i] * strut_orientation(state, i);
    nodes.segment<3>(3 * i) = p + half;
    nodes.segment<3>(3 * (i + m)) = p - half;
  }
  return nodes;
}

ShapeState state_from_nodes(const Eigen::VectorXd& nodes, const StructureSpec& spec) {
  const int m = spec.strut_count();
  if (nodes.size() != 6 * m) {
    raise(ErrorCode::InvalidArgument, "node vector size does not match spec");
  }
  ShapeState s;
  s.centers.resize(3 * m);
  s.thetas.resize(m);
  s.phis.resize(m);
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector3d top = nodes.segment<3>(3 * i);
    const Eigen::Vector3d bottom = nodes.segment<3>(3 * (i + m));
    s.centers.segment<3>(3 * i) = 0.5 * (top + bottom);
    const Eigen::Vector3d d = top - bottom;
    const double len = d.norm();
    if (len < 1e-12) {
      s.phis[i] = 0.0;
      s.thetas[i] = 0.0;
      continue;
    }
    const Eigen::Vector3d q = d / len;
    s.phis[i] = std::acos(std::clamp(q.z(), -1.0, 1.0));
    s.thetas[i] = std::hypot(q.x(), q.y()) < 1e-12 ? 0.0 : std::atan2(q.y(), q.x());
  }
  return s;
}

}  // namespace tsg
