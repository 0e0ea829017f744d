#include "metrics.hpp"

#include <cmath>

#include "error.hpp"

namespace tsg {
namespace {

constexpr double kDenomFloor = 0.1;  // rad; below this a percent error is noise

Eigen::Vector3d centroid(const Eigen::VectorXd& nodes) {
  const auto n = nodes.size() / 3;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) c += nodes.segment<3>(3 * i);
  return c / static_cast<double>(n);
}

}  // namespace

GaugeTransform align(const Eigen::VectorXd& est_nodes, const Eigen::VectorXd& ref_nodes) {
  if (est_nodes.size() != ref_nodes.size() || est_nodes.size() % 3 != 0 ||
      est_nodes.size() == 0) {
    raise(ErrorCode::InvalidArgument, "align: clouds must be equal-sized stacked xyz");
  }
  const auto n = est_nodes.size() / 3;
  const Eigen::Vector3d ce = centroid(est_nodes);
  const Eigen::Vector3d cr = centroid(ref_nodes);

  // Planar correlation of the centroid-removed horizontal coordinates.
  double dot = 0.0, cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xe = est_nodes[3 * i] - ce.x();
    const double ye = est_nodes[3 * i + 1] - ce.y();
    const double xr = ref_nodes[3 * i] - cr.x();
    const double yr = ref_nodes[3 * i + 1] - cr.y();
    dot += xe * xr + ye * yr;
    cross += xe * yr - ye * xr;
  }

  GaugeTransform g;
  g.yaw = (std::abs(dot) < 1e-15 && std::abs(cross) < 1e-15) ? 0.0 : std::atan2(cross, dot);
  const double c = std::cos(g.yaw), s = std::sin(g.yaw);
  const Eigen::Vector3d rce(c * ce.x() - s * ce.y(), s * ce.x() + c * ce.y(), ce.z());
  g.translation = cr - rce;
  return g;
}

Eigen::VectorXd apply_gauge(const GaugeTransform& g, const Eigen::VectorXd& nodes) {
  if (nodes.size() % 3 != 0) {
    raise(ErrorCode::InvalidArgument, "apply_gauge: size must be a multiple of 3");
  }
  const double c = std::cos(g.yaw), s = std::sin(g.yaw);
  Eigen::VectorXd out(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size() / 3; ++i) {
    const double x = nodes[3 * i], y = nodes[3 * i + 1], z = nodes[3 * i + 2];
    out[3 * i] = c * x - s * y + g.translation.x();
    out[3 * i + 1] = s * x + c * y + g.translation.y();
    out[3 * i + 2] = z + g.translation.z();
  }
  return out;
}

double node_mae(const Eigen::VectorXd& est_nodes, const Eigen::VectorXd& ref_nodes,
                bool aligned) {
  if (est_nodes.size() != ref_nodes.size() || est_nodes.size() % 3 != 0 ||
      est_nodes.size() == 0) {
    raise(ErrorCode::InvalidArgument, "node_mae: clouds must be equal-sized stacked xyz");
  }
  Eigen::VectorXd e = est_nodes;
  if (aligned) e = apply_gauge(align(est_nodes, ref_nodes), est_nodes);
  const auto n = e.size() / 3;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += (e.segment<3>(3 * i) - ref_nodes.segment<3>(3 * i)).norm();
  }
  return sum / static_cast<double>(n);
}

Eigen::VectorXd strut_centers_of(const Eigen::VectorXd& nodes) {
  if (nodes.size() % 6 != 0 || nodes.size() == 0) {
    raise(ErrorCode::InvalidArgument, "strut_centers_of: expected 2 nodes per strut");
  }
  const auto m = nodes.size() / 6;
  Eigen::VectorXd centers(3 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    centers.segment<3>(3 * i) =
        0.5 * (nodes.segment<3>(3 * i) + nodes.segment<3>(3 * (i + m)));
  }
  return centers;
}

AngleErrors angle_errors(const ShapeState& est, const ShapeState& ref,
                         const StructureSpec& spec) {
  check_state_dims(est, spec);
  check_state_dims(ref, spec);
  const GaugeTransform g = align(node_positions(est, spec), node_positions(ref, spec));

  AngleErrors out;
  const int m = spec.strut_count();
  out.yaw.reserve(m);
  out.inclination.reserve(m);
  for (int i = 0; i < m; ++i) {
    AngleRecord ty;
    ty.actual = normalize_angle(ref.thetas[i]);
    ty.estimated = normalize_angle(est.thetas[i] + g.yaw);
    const double dy = normalize_angle(ty.estimated - ty.actual);
    if (std::abs(ty.actual) >= kDenomFloor) {
      ty.percent = std::abs(dy) / std::abs(ty.actual) * 100.0;
    }
    out.yaw.push_back(ty);

    AngleRecord tp;
    tp.actual = ref.phis[i];
    tp.estimated = est.phis[i];
    if (std::abs(tp.actual) >= kDenomFloor) {
      tp.percent = std::abs(tp.estimated - tp.actual) / std::abs(tp.actual) * 100.0;
    }
    out.inclination.push_back(tp);
  }
  return out;
}

}  // namespace tsg
