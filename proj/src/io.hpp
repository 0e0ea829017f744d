#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>

#include "model.hpp"

namespace tsg {

/// One timestamped inclination measurement, one angle per strut.
struct InclinationFrame {
  double timestamp = 0.0;           // seconds, monotonic
  Eigen::VectorXd phis;             // radians, each in [0, pi]
};

/// One output record of the tracker: the solved node cloud plus bookkeeping.
struct EstimateRecord {
  double timestamp = 0.0;
  bool converged = false;
  double energy = 0.0;
  Eigen::VectorXd nodes;            // stacked xyz, 3n entries
};

/// Ground-truth sidecar record matching a stream line: the true node cloud
/// and the true angles it was generated from.
struct TruthRecord {
  double timestamp = 0.0;
  Eigen::VectorXd nodes;            // 3n
  Eigen::VectorXd thetas;           // m_b
  Eigen::VectorXd phis;             // m_b
};

/// Locale-free decimal text with enough digits (17 significant) that
/// parse_double(format_double(v)) == v bit-for-bit for finite doubles.
std::string format_double(double v);

/// Strict numeric parse of a whole token; raises Parse on trailing junk.
double parse_double(std::string_view token, const std::string& context);

/// Line formats. All lines are single-space separated numeric fields,
/// newline handled by the caller. line_no > 0 is included in error messages.
std::string render_frame(const InclinationFrame& frame);
InclinationFrame parse_frame(std::string_view line, std::size_t expected_arity,
                             std::size_t line_no = 0);

std::string render_estimate(const EstimateRecord& rec);
EstimateRecord parse_estimate(std::string_view line, std::size_t node_count,
                              std::size_t line_no = 0);

std::string render_truth(const TruthRecord& rec);
TruthRecord parse_truth(std::string_view line, std::size_t strut_count,
                        std::size_t line_no = 0);

/// Structure spec files are JSON documents:
///   {"name": ..., "strut_lengths": [m, ...],
///    "cables": [{"a": i, "b": j, "k": N_per_m, "b0": m}, ...]}
/// Node indices are 0-based; b0 defaults to 0. Parsing checks structure
/// only; semantic checks stay in validate_spec so the CLI can report them.
StructureSpec parse_spec_json(const std::string& text);
std::string spec_to_json(const StructureSpec& spec);

/// Reads a spec from a path, or resolves the bundled structures when given
/// "builtin:prism" or "builtin:taut-prism".
StructureSpec load_spec_file(const std::string& path);
void save_spec_file(const StructureSpec& spec, const std::string& path);

}  // namespace tsg
