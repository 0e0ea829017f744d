#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "error.hpp"
#include "estimator.hpp"

namespace tsg {
namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_phi(double phi) { return std::min(std::max(phi, 0.0), kPi); }

double smoothstep(double u) {
  u = std::min(std::max(u, 0.0), 1.0);
  return u * u * (3.0 - 2.0 * u);
}

/// Parameter vector layout used by the oracle: [p (3m) | theta (m) | phi (m)].
struct OracleProblem {
  const StructureSpec& spec;
  std::size_t m;
  std::vector<std::vector<int>> incident;  // strut -> cable indices touching it

  explicit OracleProblem(const StructureSpec& s)
      : spec(s), m(static_cast<std::size_t>(s.strut_count())) {
    incident.resize(m);
    for (std::size_t k = 0; k < spec.cables.size(); ++k) {
      const auto sa = static_cast<std::size_t>(spec.cables[k].node_a) % m;
      const auto sb = static_cast<std::size_t>(spec.cables[k].node_b) % m;
      incident[sa].push_back(static_cast<int>(k));
      if (sb != sa) incident[sb].push_back(static_cast<int>(k));
    }
  }

  Eigen::Vector3d node_pos(const std::vector<double>& x, int node) const {
    const auto mm = static_cast<int>(m);
    const int strut = node % mm;
    const double sign = node < mm ? 1.0 : -1.0;
    const double theta = x[3 * m + static_cast<std::size_t>(strut)];
    const double phi = x[4 * m + static_cast<std::size_t>(strut)];
    const double sp = std::sin(phi), cp = std::cos(phi);
    const Eigen::Vector3d q(sp * std::cos(theta), sp * std::sin(theta), cp);
    const Eigen::Vector3d p(x[3 * static_cast<std::size_t>(strut)],
                            x[3 * static_cast<std::size_t>(strut) + 1],
                            x[3 * static_cast<std::size_t>(strut) + 2]);
    return p + sign * 0.5 * spec.strut_lengths[static_cast<std::size_t>(strut)] * q;
  }

  double cable_term(const std::vector<double>& x, int k) const {
    const CableSpec& c = spec.cables[static_cast<std::size_t>(k)];
    const double len = (node_pos(x, c.node_a) - node_pos(x, c.node_b)).norm();
    const double stretch = len - c.rest_length;
    return 0.5 * c.stiffness * stretch * stretch;
  }

  double energy(const std::vector<double>& x) const {
    double e = 0.0;
    for (std::size_t k = 0; k < spec.cables.size(); ++k) {
      e += cable_term(x, static_cast<int>(k));
    }
    return e;
  }

  /// Central finite differences. Each coordinate moves one strut only, so
  /// only that strut's incident cables contribute to the difference.
  std::vector<double> fd_gradient(std::vector<double>& x) const {
    std::vector<double> g(x.size(), 0.0);
    for (std::size_t c = 0; c < x.size(); ++c) {
      const std::size_t strut = c < 3 * m ? c / 3 : (c - 3 * m) % m;
      const double v = x[c];
      const double h = 1e-6 * std::max(1.0, std::abs(v));
      double plus = 0.0, minus = 0.0;
      x[c] = v + h;
      for (int k : incident[strut]) plus += cable_term(x, k);
      x[c] = v - h;
      for (int k : incident[strut]) minus += cable_term(x, k);
      x[c] = v;
      g[c] = (plus - minus) / (2.0 * h);
    }
    return g;
  }
};

std::vector<double> pack(const ShapeState& state) {
  const auto m = static_cast<std::size_t>(state.strut_count());
  std::vector<double> x(5 * m);
  for (std::size_t i = 0; i < 3 * m; ++i) x[i] = state.centers[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i < m; ++i) {
    x[3 * m + i] = state.thetas[static_cast<Eigen::Index>(i)];
    x[4 * m + i] = state.phis[static_cast<Eigen::Index>(i)];
  }
  return x;
}

ShapeState unpack(const std::vector<double>& x, std::size_t m) {
  ShapeState s;
  s.centers.resize(static_cast<Eigen::Index>(3 * m));
  s.thetas.resize(static_cast<Eigen::Index>(m));
  s.phis.resize(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < 3 * m; ++i) s.centers[static_cast<Eigen::Index>(i)] = x[i];
  for (std::size_t i = 0; i < m; ++i) {
    s.thetas[static_cast<Eigen::Index>(i)] = normalize_angle(x[3 * m + i]);
    s.phis[static_cast<Eigen::Index>(i)] = clamp_phi(x[4 * m + i]);
  }
  return s;
}

ShapeState interp_state(const ShapeState& a, const ShapeState& b, double w) {
  ShapeState s = a;
  s.centers = (1.0 - w) * a.centers + w * b.centers;
  for (Eigen::Index i = 0; i < a.thetas.size(); ++i) {
    s.thetas[i] = normalize_angle(a.thetas[i] + w * normalize_angle(b.thetas[i] - a.thetas[i]));
    s.phis[i] = clamp_phi((1.0 - w) * a.phis[i] + w * b.phis[i]);
  }
  return s;
}

/// Cables touching the node with the largest x coordinate in the base
/// state: the "one side" whose rest lengths the lateral scenario shortens.
StructureSpec lean_spec(const StructureSpec& spec, const ShapeState& base) {
  const Eigen::VectorXd nodes = node_positions(base, spec);
  int side_node = 0;
  for (Eigen::Index i = 1; i < nodes.size() / 3; ++i) {
    if (nodes[3 * i] > nodes[3 * side_node]) side_node = static_cast<int>(i);
  }
  StructureSpec bent = spec;
  for (auto& c : bent.cables) {
    if (c.node_a == side_node || c.node_b == side_node) c.rest_length *= 0.6;
  }
  return bent;
}

}  // namespace

Scenario scenario_from_name(const std::string& name) {
  if (name == "stationary") return Scenario::Stationary;
  if (name == "lateral") return Scenario::Lateral;
  if (name == "angular") return Scenario::Angular;
  if (name == "tilted") return Scenario::Tilted;
  if (name == "recovery") return Scenario::Recovery;
  raise(ErrorCode::InvalidArgument,
        "unknown scenario '" + name +
            "' (expected stationary|lateral|angular|tilted|recovery)");
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Stationary: return "stationary";
    case Scenario::Lateral: return "lateral";
    case Scenario::Angular: return "angular";
    case Scenario::Tilted: return "tilted";
    case Scenario::Recovery: return "recovery";
  }
  return "?";
}

ShapeState prism_like_init(const StructureSpec& spec, double mean_phi) {
  const int m = spec.strut_count();
  if (!(mean_phi > 0.0 && mean_phi < 0.5 * kPi)) {
    raise(ErrorCode::InvalidArgument, "prism_like_init: mean_phi must be in (0, pi/2)");
  }
  // Classic prism twist: the relative ring rotation at which an m-strut
  // prism admits a self-stress, hence where taut equilibria live.
  const double twist = 0.5 * kPi + kPi / m;
  ShapeState s;
  s.centers.resize(3 * m);
  s.thetas.resize(m);
  s.phis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double L = spec.strut_lengths[i];
    // Ring radius giving horizontal chord L*sin(mean_phi) under the twist.
    const double r = L * std::sin(mean_phi) / (2.0 * std::sin(0.5 * twist));
    const double az = 2.0 * kPi * i / m;
    const double h = L * std::cos(mean_phi);
    const Eigen::Vector3d bottom(r * std::cos(az), r * std::sin(az), -0.5 * h);
    const Eigen::Vector3d top(r * std::cos(az + twist), r * std::sin(az + twist), 0.5 * h);
    const Eigen::Vector3d q = (top - bottom).normalized();
    s.centers.segment<3>(3 * i) = 0.5 * (top + bottom);
    s.phis[i] = std::acos(std::min(std::max(q.z(), -1.0), 1.0));
    s.thetas[i] = std::atan2(q.y(), q.x());
  }
  return s;
}

StructureSpec taut_prism() {
  StructureSpec spec = builtin_prism();
  const int m = spec.strut_count();
  const double L = spec.strut_lengths[0];
  const double r = 0.15;
  const double twist = 0.5 * kPi + kPi / m;
  const double chord = 2.0 * r * std::sin(0.5 * twist);
  const double phi_star = std::atan2(chord, std::sqrt(L * L - chord * chord));
  const ShapeState ref = prism_like_init(spec, phi_star);
  const Eigen::VectorXd nodes = node_positions(ref, spec);

  // Self-stress at the reference geometry: node 0 joins two ring cables, one
  // diagonal cable and its strut. A force balance a*(u1+u2) + c*v + s*w = 0
  // with a,c > 0 (tension) and s < 0 (compression) exists exactly at the
  // prism twist; by symmetry the same (a, c) balances every node.
  const Eigen::Vector3d n0 = nodes.segment<3>(0);
  Eigen::Vector3d ring_sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d diag_dir = Eigen::Vector3d::Zero();
  for (const CableSpec& c : spec.cables) {
    if (c.node_a != 0 && c.node_b != 0) continue;
    const int other = c.node_a == 0 ? c.node_b : c.node_a;
    const Eigen::Vector3d dir = (nodes.segment<3>(3 * other) - n0).normalized();
    if (other < m) {
      ring_sum += dir;
    } else {
      diag_dir = dir;
    }
  }
  Eigen::Matrix3d balance;
  balance.col(0) = ring_sum;
  balance.col(1) = diag_dir;
  balance.col(2) = (nodes.segment<3>(3 * m) - n0).normalized();
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(balance, Eigen::ComputeFullV);
  Eigen::Vector3d t = svd.matrixV().col(2);
  if (t[0] < 0.0) t = -t;
  if (!(svd.singularValues()[2] < 1e-12 && t[0] > 0.0 && t[1] > 0.0 && t[2] < 0.0)) {
    raise(ErrorCode::SingularConfiguration, "taut_prism: self-stress solve failed");
  }

  // Rest lengths put the most strained cable family at 15% elongation, so the
  // reference geometry is a prestressed energy minimum with every cable taut.
  double max_strain = 0.0;
  std::vector<double> lengths(spec.cables.size());
  std::vector<double> tensions(spec.cables.size());
  for (std::size_t k = 0; k < spec.cables.size(); ++k) {
    const CableSpec& c = spec.cables[k];
    lengths[k] =
        (nodes.segment<3>(3 * c.node_a) - nodes.segment<3>(3 * c.node_b)).norm();
    const bool ring = (c.node_a < m) == (c.node_b < m);
    tensions[k] = ring ? t[0] : t[1];
    max_strain = std::max(max_strain, tensions[k] / (c.stiffness * lengths[k]));
  }
  const double scale = 0.15 / max_strain;
  for (std::size_t k = 0; k < spec.cables.size(); ++k) {
    spec.cables[k].rest_length =
        lengths[k] - scale * tensions[k] / spec.cables[k].stiffness;
  }
  spec.name = "class1-prism-taut";
  return spec;
}

ShapeState equilibrium_oracle(const StructureSpec& spec, const Eigen::VectorXd& anchor_phis,
                              const std::optional<ShapeState>& init,
                              const OracleOptions& options) {
  build_connectivity(spec);  // reject invalid specs up front
  const auto m = static_cast<std::size_t>(spec.strut_count());
  if (anchor_phis.size() != 0 && anchor_phis.size() != static_cast<Eigen::Index>(m)) {
    raise(ErrorCode::InvalidArgument, "equilibrium_oracle: anchor_phis arity mismatch");
  }

  ShapeState start;
  if (init.has_value()) {
    check_state_dims(*init, spec);
    start = *init;
  } else {
    const double mean_phi =
        anchor_phis.size() == 0 ? 0.95 : std::min(std::max(anchor_phis.mean(), 0.1), 1.4);
    start = prism_like_init(spec, mean_phi);
    for (Eigen::Index i = 0; i < anchor_phis.size(); ++i) {
      start.phis[i] = clamp_phi(anchor_phis[i]);
    }
  }

  const OracleProblem prob(spec);
  std::vector<double> x = pack(start);
  double e = prob.energy(x);

  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    const std::vector<double> g = prob.fd_gradient(x);
    double norm2 = 0.0;
    for (double v : g) norm2 += v * v;
    if (std::sqrt(norm2) <= options.grad_tol) {
      const ShapeState result = unpack(x, m);
      const Degeneracy deg = detect_degenerate(result, spec);
      if (deg.degenerate) {
        raise(ErrorCode::OracleFailure,
              "oracle converged to a degenerate state: " + deg.reason);
      }
      return result;
    }

    double s = options.step;
    bool accepted = false;
    std::vector<double> trial(x.size());
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t c = 0; c < x.size(); ++c) {
        trial[c] = x[c] - s * g[c];
        if (c >= 4 * m) trial[c] = clamp_phi(trial[c]);
      }
      const double e2 = prob.energy(trial);
      if (e2 < e) {
        x.swap(trial);
        e = e2;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      raise(ErrorCode::OracleFailure,
            "oracle stalled: no descent direction at gradient norm " +
                std::to_string(std::sqrt(norm2)));
    }
  }
  raise(ErrorCode::OracleFailure, "oracle exhausted its iteration budget");
}

InclinationFrame synth_inclinations(const ShapeState& state, const NoiseModel& noise) {
  RandomEngine rng(noise.seed);
  return synth_inclinations(state, noise, rng);
}

InclinationFrame synth_inclinations(const ShapeState& state, const NoiseModel& noise,
                                    RandomEngine& rng) {
  if (noise.sigma_phi < 0.0) {
    raise(ErrorCode::InvalidArgument, "synth_inclinations: sigma_phi must be >= 0");
  }
  const auto m = state.strut_count();
  if (noise.bias_phi.size() != 0 && noise.bias_phi.size() != static_cast<Eigen::Index>(m)) {
    raise(ErrorCode::InvalidArgument, "synth_inclinations: bias arity mismatch");
  }
  InclinationFrame frame;
  frame.phis.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < frame.phis.size(); ++i) {
    const double bias = noise.bias_phi.size() ? noise.bias_phi[i] : 0.0;
    const double jitter = noise.sigma_phi > 0.0 ? noise.sigma_phi * rng.normal() : 0.0;
    frame.phis[i] = clamp_phi(state.phis[i] + bias + jitter);
  }
  return frame;
}

ShapeState rotate_state(const ShapeState& state, const Eigen::Vector3d& axis,
                        double angle, const StructureSpec& spec) {
  check_state_dims(state, spec);
  const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  ShapeState out = state;
  for (Eigen::Index i = 0; i < state.thetas.size(); ++i) {
    out.centers.segment<3>(3 * i) = R * state.centers.segment<3>(3 * i);
    const Eigen::Vector3d q = R * orientation_from_angles(state.phis[i], state.thetas[i]);
    out.phis[i] = std::acos(std::min(std::max(q.z(), -1.0), 1.0));
    const double sin_phi = std::hypot(q.x(), q.y());
    out.thetas[i] = sin_phi < 1e-12 ? state.thetas[i] : std::atan2(q.y(), q.x());
  }
  return out;
}

Trajectory make_trajectory(const StructureSpec& spec, Scenario scenario,
                           double duration, double rate, const NoiseModel& noise) {
  if (!(duration > 0.0) || !(rate > 0.0)) {
    raise(ErrorCode::InvalidArgument, "make_trajectory: duration and rate must be > 0");
  }
  const ShapeState base = equilibrium_oracle(spec, Eigen::VectorXd());

  ShapeState from = base;
  ShapeState to = base;
  switch (scenario) {
    case Scenario::Stationary:
      break;
    case Scenario::Lateral:
      to = equilibrium_oracle(lean_spec(spec, base), Eigen::VectorXd(), base);
      break;
    case Scenario::Angular:
      to = rotate_state(base, Eigen::Vector3d::UnitX(), 15.0 * kPi / 180.0, spec);
      break;
    case Scenario::Tilted:
      from = rotate_state(base, Eigen::Vector3d::UnitY(), 30.0 * kPi / 180.0, spec);
      to = from;
      break;
    case Scenario::Recovery:
      to = equilibrium_oracle(lean_spec(spec, base), Eigen::VectorXd(), base);
      break;
  }

  const auto count = static_cast<std::size_t>(std::llround(duration * rate));
  Trajectory traj;
  traj.points.reserve(count);
  RandomEngine rng(noise.seed);
  for (std::size_t j = 0; j < std::max<std::size_t>(count, 1); ++j) {
    const double t = static_cast<double>(j) / rate;
    const double u = t / duration;

    double w = 0.0;
    switch (scenario) {
      case Scenario::Stationary:
      case Scenario::Tilted:
        break;
      case Scenario::Lateral:
      case Scenario::Angular:
        // Hold the base shape for the first quarter, then deform.
        w = smoothstep((u - 0.25) / 0.5);
        break;
      case Scenario::Recovery:
        if (u < 0.25) {
          w = 0.0;
        } else if (u < 0.5) {
          w = smoothstep((u - 0.25) / 0.25);
        } else if (u < 0.75) {
          w = smoothstep(1.0 - (u - 0.5) / 0.25);
        } else {
          w = 0.0;
        }
        break;
    }

    TrajectoryPoint pt;
    pt.timestamp = t;
    pt.truth = w == 0.0 ? from : interp_state(from, to, w);
    pt.frame = synth_inclinations(pt.truth, noise, rng);
    pt.frame.timestamp = t;
    traj.points.push_back(std::move(pt));
  }
  return traj;
}

}  // namespace tsg
