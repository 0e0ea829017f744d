#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "io.hpp"
#include "kinematics.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace tsg {

/// Sensor model for synthetic inclination readings: a per-strut constant
/// bias plus white gaussian noise, applied at the angle level.
struct NoiseModel {
  double sigma_phi = 0.0;        // radians, >= 0
  Eigen::VectorXd bias_phi;      // radians per strut; empty means all zero
  std::uint64_t seed = 0;
};

enum class Scenario { Stationary, Lateral, Angular, Tilted, Recovery };

Scenario scenario_from_name(const std::string& name);
const char* scenario_name(Scenario s);

struct TrajectoryPoint {
  double timestamp = 0.0;
  ShapeState truth;
  InclinationFrame frame;        // noisy reading derived from truth
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
};

struct OracleOptions {
  std::size_t max_iters = 400000;
  double step = 2e-3;            // nominal descent step, halved on overshoot
  double grad_tol = 1e-6;        // on the finite-difference gradient norm
};

/// Hand-built two-ring layout: struts evenly spaced on a circle, the top
/// ring twisted by the classic prism angle pi/2 + pi/m, ring radius chosen
/// so every strut sits at inclination mean_phi. Oracle starting shape.
ShapeState prism_like_init(const StructureSpec& spec, double mean_phi = 0.95);

/// The bundled prism with rest lengths derived from a positive self-stress
/// of the prism geometry, so the structure is prestressed: the minimum-energy
/// shape holds every cable at positive tension (15% elongation on the most
/// strained family).
StructureSpec taut_prism();

/// Ground-truth generator: minimizes the cable energy over centers, yaws
/// and inclinations by plain descent on central finite differences of its
/// own direct energy sum. Deliberately shares no gradient code with the
/// rest of the library so round-trip tests have an independent reference.
/// anchor_phis seeds the initial inclinations; pass init to start elsewhere.
/// Raises OracleFailure if the gradient norm does not reach grad_tol.
ShapeState equilibrium_oracle(const StructureSpec& spec,
                              const Eigen::VectorXd& anchor_phis,
                              const std::optional<ShapeState>& init = std::nullopt,
                              const OracleOptions& options = {});

/// phi_i = clamp(true phi_i + bias_i + N(0, sigma), 0, pi). The first form
/// seeds a fresh generator from the noise model (same state, same output);
/// the second draws from a caller-owned stream.
InclinationFrame synth_inclinations(const ShapeState& state, const NoiseModel& noise);
InclinationFrame synth_inclinations(const ShapeState& state, const NoiseModel& noise,
                                    RandomEngine& rng);

/// Rigidly rotates a state about an axis through the origin, re-expressing
/// the result as (centers, theta, phi). Node clouds map exactly.
ShapeState rotate_state(const ShapeState& state, const Eigen::Vector3d& axis,
                        double angle, const StructureSpec& spec);

/// Ground-truth trajectory for a scenario: endpoint shapes come from the
/// oracle (or rigid rotations of it), intermediate states interpolate with
/// smoothstep timing. Intermediates are not themselves equilibria.
Trajectory make_trajectory(const StructureSpec& spec, Scenario scenario,
                           double duration, double rate, const NoiseModel& noise);

}  // namespace tsg
