#include "doctest.h"

#include <algorithm>

#include "error.hpp"
#include "model.hpp"

using namespace tsg;

namespace {

// The documented 12x8 cable incidence pattern of the bundled prism: four
// upper-loop rows, four bottom-loop rows, four interconnect rows.
constexpr int kPrismCs[12][8] = {
    {1, -1, 0, 0, 0, 0, 0, 0},   {0, 1, -1, 0, 0, 0, 0, 0},
    {0, 0, 1, -1, 0, 0, 0, 0},   {-1, 0, 0, 1, 0, 0, 0, 0},
    {0, 0, 0, 0, 1, -1, 0, 0},   {0, 0, 0, 0, 0, 1, -1, 0},
    {0, 0, 0, 0, 0, 0, 1, -1},   {0, 0, 0, 0, -1, 0, 0, 1},
    {1, 0, 0, 0, 0, -1, 0, 0},   {0, 1, 0, 0, 0, 0, -1, 0},
    {0, 0, 1, 0, 0, 0, 0, -1},   {0, 0, 0, 1, -1, 0, 0, 0},
};

StructureSpec two_strut_spec() {
  StructureSpec s;
  s.name = "pair";
  s.strut_lengths = {0.4, 0.4};
  s.cables.push_back({0, 1, 50.0, 0.0});
  s.cables.push_back({2, 3, 50.0, 0.1});
  return s;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("builtin prism counts and members") {
  const StructureSpec spec = builtin_prism();
  CHECK(spec.strut_count() == 4);
  CHECK(spec.node_count() == 8);
  CHECK(spec.cable_count() == 12);
  for (double L : spec.strut_lengths) CHECK(L == doctest::Approx(0.37));
  for (const CableSpec& c : spec.cables) {
    CHECK(c.stiffness == doctest::Approx(64.0));
    CHECK(c.rest_length == 0.0);
  }
  CHECK(validate_spec(spec).empty());
}

TEST_CASE("builtin prism reproduces the documented incidence matrix") {
  const ConnectivityMatrices conn = build_connectivity(builtin_prism());
  REQUIRE(conn.cables.rows() == 12);
  REQUIRE(conn.cables.cols() == 8);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 8; ++c) {
      CHECK(conn.cables(r, c) == static_cast<double>(kPrismCs[r][c]));
    }
  }
}

TEST_CASE("strut incidence pairs node i with node i+m") {
  const ConnectivityMatrices conn = build_connectivity(builtin_prism());
  REQUIRE(conn.struts.rows() == 4);
  REQUIRE(conn.struts.cols() == 8);
  for (int i = 0; i < 4; ++i) {
    for (int c = 0; c < 8; ++c) {
      const double want = c == i ? 1.0 : (c == i + 4 ? -1.0 : 0.0);
      CHECK(conn.struts(i, c) == want);
    }
  }
}

TEST_CASE("incidence rows sum to zero") {
  for (const StructureSpec& spec : {builtin_prism(), two_strut_spec()}) {
    const ConnectivityMatrices conn = build_connectivity(spec);
    for (int r = 0; r < conn.cables.rows(); ++r) {
      CHECK(conn.cables.row(r).sum() == 0.0);
    }
    for (int r = 0; r < conn.struts.rows(); ++r) {
      CHECK(conn.struts.row(r).sum() == 0.0);
    }
  }
}

TEST_CASE("cable reordering permutes rows and nothing else") {
  StructureSpec spec = builtin_prism();
  std::vector<int> order = {5, 0, 11, 3, 7, 1, 9, 2, 10, 4, 8, 6};
  StructureSpec shuffled = spec;
  for (std::size_t k = 0; k < order.size(); ++k) {
    shuffled.cables[k] = spec.cables[static_cast<std::size_t>(order[k])];
  }
  const ConnectivityMatrices base = build_connectivity(spec);
  const ConnectivityMatrices perm = build_connectivity(shuffled);
  for (std::size_t k = 0; k < order.size(); ++k) {
    CHECK((perm.cables.row(static_cast<int>(k)) - base.cables.row(order[k])).norm() ==
          0.0);
  }
  CHECK((perm.struts - base.struts).norm() == 0.0);
}

TEST_CASE("validate_spec reports each violation") {
  StructureSpec spec = two_strut_spec();
  spec.strut_lengths[1] = -1.0;
  spec.cables[0].node_b = 9;
  spec.cables[1].stiffness = 0.0;
  spec.cables.push_back({2, 2, 10.0, -0.5});
  const std::vector<std::string> v = validate_spec(spec);
  REQUIRE(v.size() == 5);
  CHECK(v[0].find("strut 1") != std::string::npos);
  CHECK(v[1].find("outside [0, 4)") != std::string::npos);
  CHECK(v[2].find("non-positive stiffness") != std::string::npos);
  CHECK(v[3].find("to itself") != std::string::npos);
  CHECK(v[4].find("negative rest length") != std::string::npos);
}

TEST_CASE("empty structure is invalid") {
  StructureSpec spec;
  const std::vector<std::string> v = validate_spec(spec);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "structure has no struts");
}

TEST_CASE("build_connectivity raises on invalid specs with the full report") {
  StructureSpec spec = two_strut_spec();
  spec.cables[0].node_a = -1;
  spec.strut_lengths[0] = 0.0;
  try {
    build_connectivity(spec);
    FAIL("expected SpecInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpecInvalid);
    CHECK(std::string(e.what()).find("strut 0") != std::string::npos);
    CHECK(std::string(e.what()).find("cable 0") != std::string::npos);
  }
}

}  // TEST_SUITE
