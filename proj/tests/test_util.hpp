#pragma once

#include <string>

#include "kinematics.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace tsg_test {

constexpr double kPi = 3.14159265358979323846;

/// Uniform random shape with inclinations kept away from the poles.
inline tsg::ShapeState random_state(tsg::RandomEngine& rng,
                                    const tsg::StructureSpec& spec) {
  const int m = spec.strut_count();
  tsg::ShapeState s;
  s.centers.resize(3 * m);
  s.thetas.resize(m);
  s.phis.resize(m);
  for (int i = 0; i < 3 * m; ++i) s.centers[i] = rng.uniform(-0.5, 0.5);
  for (int i = 0; i < m; ++i) {
    s.thetas[i] = rng.uniform(-3.1, 3.1);
    s.phis[i] = rng.uniform(0.1, 3.0);
  }
  return s;
}

/// Unique scratch path under the system temp directory.
std::string temp_path(const std::string& tag);

}  // namespace tsg_test
