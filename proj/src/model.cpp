#include "model.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace tsg {

std::vector<std::string> validate_spec(const StructureSpec& spec) {
  std::vector<std::string> violations;
  const int m = spec.strut_count();
  const int n = spec.node_count();

  if (m < 1) violations.push_back("structure has no struts");

  for (int i = 0; i < m; ++i) {
    const double len = spec.strut_lengths[i];
    if (!(len > 0.0) || !std::isfinite(len)) {
      std::ostringstream os;
      os << "strut " << i << " has non-positive length " << len;
      violations.push_back(os.str());
    }
  }

  for (int k = 0; k < spec.cable_count(); ++k) {
    const CableSpec& c = spec.cables[k];
    std::ostringstream os;
    if (c.node_a < 0 || c.node_a >= n || c.node_b < 0 || c.node_b >= n) {
      os << "cable " << k << " references node outside [0, " << n << ")";
      violations.push_back(os.str());
      continue;
    }
    if (c.node_a == c.node_b) {
      os << "cable " << k << " connects node " << c.node_a << " to itself";
      violations.push_back(os.str());
    }
    if (!(c.stiffness > 0.0) || !std::isfinite(c.stiffness)) {
      std::ostringstream os2;
      os2 << "cable " << k << " has non-positive stiffness " << c.stiffness;
      violations.push_back(os2.str());
    }
    if (c.rest_length < 0.0 || !std::isfinite(c.rest_length)) {
      std::ostringstream os2;
      os2 << "cable " << k << " has negative rest length " << c.rest_length;
      violations.push_back(os2.str());
    }
  }
  return violations;
}

ConnectivityMatrices build_connectivity(const StructureSpec& spec) {
  const auto violations = validate_spec(spec);
  if (!violations.empty()) {
    std::string joined = "invalid structure spec:";
    for (const auto& v : violations) joined += "\n  - " + v;
    raise(ErrorCode::SpecInvalid, joined);
  }

  const int m_b = spec.strut_count();
  const int m_s = spec.cable_count();
  const int n = spec.node_count();

  ConnectivityMatrices conn;
  conn.cables = Eigen::MatrixXd::Zero(m_s, n);
  for (int k = 0; k < m_s; ++k) {
    conn.cables(k, spec.cables[k].node_a) = 1.0;
    conn.cables(k, spec.cables[k].node_b) = -1.0;
  }
  conn.struts = Eigen::MatrixXd::Zero(m_b, n);
  for (int i = 0; i < m_b; ++i) {
    conn.struts(i, i) = 1.0;
    conn.struts(i, i + m_b) = -1.0;
  }
  return conn;
}

StructureSpec builtin_prism() {
  StructureSpec spec;
  spec.name = "class1-prism";
  spec.strut_lengths.assign(4, 0.37);

  constexpr double kStiffness = 64.0;  // 0.064 N/mm
  auto cable = [&](int a, int b) {
    spec.cables.push_back(CableSpec{a, b, kStiffness, 0.0});
  };
  // Upper loop over the +q ends.
  cable(0, 1);
  cable(1, 2);
  cable(2, 3);
  cable(3, 0);
  // Bottom loop over the -q ends.
  cable(4, 5);
  cable(5, 6);
  cable(6, 7);
  cable(7, 4);
  // Interconnecting diagonals, top of strut i to bottom of strut i+1.
  cable(0, 5);
  cable(1, 6);
  cable(2, 7);
  cable(3, 4);
  return spec;
}

}  // namespace tsg
