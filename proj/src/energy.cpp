#include "energy.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace tsg {

namespace {
constexpr double kZeroLength = 1e-12;
}  // namespace

// For b = 0 the force is exactly K d, defined for every d.
Eigen::Vector3d cable_force(const CableSpec& c, const Eigen::Vector3d& d, int k) {
  if (c.rest_length == 0.0) return c.stiffness * d;
  const double len = d.norm();
  if (len < kZeroLength) {
    std::ostringstream os;
    os << "cable " << k << " has zero length with rest length " << c.rest_length
       << "; gradient direction undefined";
    raise(ErrorCode::SingularConfiguration, os.str());
  }
  return c.stiffness * (1.0 - c.rest_length / len) * d;
}

std::vector<Eigen::Vector3d> cable_vectors(const Eigen::VectorXd& nodes,
                                           const StructureSpec& spec) {
  if (nodes.size() != 3 * spec.node_count()) {
    raise(ErrorCode::InvalidArgument, "node vector size does not match spec");
  }
  std::vector<Eigen::Vector3d> out;
  out.reserve(spec.cables.size());
  for (const CableSpec& c : spec.cables) {
    out.push_back(nodes.segment<3>(3 * c.node_a) - nodes.segment<3>(3 * c.node_b));
  }
  return out;
}

EnergyReport energy_of_nodes(const Eigen::VectorXd& nodes, const StructureSpec& spec) {
  const auto diffs = cable_vectors(nodes, spec);
  const int m_s = spec.cable_count();
  EnergyReport report;
  report.per_cable.resize(m_s);
  report.cable_lengths.resize(m_s);
  double total = 0.0;
  for (int k = 0; k < m_s; ++k) {
    const double len = diffs[k].norm();
    const double stretch = len - spec.cables[k].rest_length;
    const double e = 0.5 * spec.cables[k].stiffness * stretch * stretch;
    report.cable_lengths[k] = len;
    report.per_cable[k] = e;
    total += e;
  }
  report.total = total;
  return report;
}

EnergyReport total_energy(const ShapeState& state, const StructureSpec& spec) {
  return energy_of_nodes(node_positions(state, spec), spec);
}

Gradients energy_gradients(const ShapeState& state, const StructureSpec& spec) {
  const int m = spec.strut_count();
  const Eigen::VectorXd nodes = node_positions(state, spec);

  // Incidence-transpose accumulation of the cable forces onto the nodes.
  Eigen::VectorXd node_grad = Eigen::VectorXd::Zero(nodes.size());
  for (int k = 0; k < spec.cable_count(); ++k) {
    const CableSpec& c = spec.cables[k];
    const Eigen::Vector3d d =
        nodes.segment<3>(3 * c.node_a) - nodes.segment<3>(3 * c.node_b);
    const Eigen::Vector3d f = cable_force(c, d, k);
    node_grad.segment<3>(3 * c.node_a) += f;
    node_grad.segment<3>(3 * c.node_b) -= f;
  }

  Gradients g;
  g.p.resize(3 * m);
  g.theta.resize(m);
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector3d top = node_grad.segment<3>(3 * i);
    const Eigen::Vector3d bottom = node_grad.segment<3>(3 * (i + m));
    // Both nodes ride on the center; the axis enters with +L/2 and -L/2.
    g.p.segment<3>(3 * i) = top + bottom;
    const Eigen::Vector3d dq =
        orientation_jacobian_theta(state.phis[i], state.thetas[i]);
    g.theta[i] = 0.5 * spec.strut_lengths[i] * (top - bottom).dot(dq);
  }
  return g;
}

Eigen::VectorXd grad_p(const ShapeState& state, const StructureSpec& spec) {
  return energy_gradients(state, spec).p;
}

Eigen::VectorXd grad_theta(const ShapeState& state, const StructureSpec& spec) {
  return energy_gradients(state, spec).theta;
}

}  // namespace tsg
