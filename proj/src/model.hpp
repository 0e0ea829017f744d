#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tsg {

/// Elastic cable between two nodes. `node_a` carries the +1 entry of the
/// cable's incidence row, `node_b` the -1 entry.
struct CableSpec {
  int node_a = 0;
  int node_b = 0;
  double stiffness = 0.0;    // N/m
  double rest_length = 0.0;  // m, natural length; 0 means zero-rest-length spring
};

/// Immutable description of a Class 1 tensegrity structure.
///
/// Node numbering convention: strut i owns node i (its +q end) and node
/// i + strut_count() (its -q end), so there are exactly 2 nodes per strut.
struct StructureSpec {
  std::string name;
  std::vector<double> strut_lengths;  // m, one entry per strut
  std::vector<CableSpec> cables;

  int strut_count() const { return static_cast<int>(strut_lengths.size()); }
  int node_count() const { return 2 * strut_count(); }
  int cable_count() const { return static_cast<int>(cables.size()); }
};

/// Signed incidence matrices at node granularity. The same pattern applies to
/// each coordinate axis, so an m x n matrix is stored instead of 3m x 3n.
struct ConnectivityMatrices {
  Eigen::MatrixXd cables;  // m_s x n, one row per cable: +1 at node_a, -1 at node_b
  Eigen::MatrixXd struts;  // m_b x n, row i: +1 at node i, -1 at node i + m_b
};

/// Checks every structural invariant and returns one human-readable message
/// per violation. An empty result means the spec is well-formed.
std::vector<std::string> validate_spec(const StructureSpec& spec);

/// Builds the cable and strut incidence matrices. Throws ErrorCode::SpecInvalid
/// carrying the full violation list if the spec does not validate.
ConnectivityMatrices build_connectivity(const StructureSpec& spec);

/// The bundled four-strut Class 1 prism: 0.37 m struts, twelve cables of
/// 64 N/m stiffness and zero rest length, ordered upper loop, bottom loop,
/// then the interconnecting diagonals.
StructureSpec builtin_prism();

}  // namespace tsg
