#include "io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "simulate.hpp"

namespace tsg {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::string location(std::size_t line_no) {
  return line_no > 0 ? "line " + std::to_string(line_no) + ": " : std::string();
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Eigen::VectorXd parse_block(const std::vector<std::string_view>& tokens, std::size_t offset,
                            std::size_t count, const std::string& context) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    v[static_cast<Eigen::Index>(k)] =
        parse_double(tokens[offset + k], context + " field " + std::to_string(offset + k + 1));
  }
  return v;
}

void require_arity(const std::vector<std::string_view>& tokens, std::size_t expected,
                   std::size_t line_no, const char* what) {
  if (tokens.size() != expected) {
    raise(ErrorCode::Parse, location(line_no) + what + ": expected " +
                                std::to_string(expected) + " fields, got " +
                                std::to_string(tokens.size()));
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& context) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    raise(ErrorCode::Parse, context + ": not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::string render_frame(const InclinationFrame& frame) {
  std::string out = format_double(frame.timestamp);
  for (Eigen::Index i = 0; i < frame.phis.size(); ++i) {
    out += ' ';
    out += format_double(frame.phis[i]);
  }
  return out;
}

InclinationFrame parse_frame(std::string_view line, std::size_t expected_arity,
                             std::size_t line_no) {
  const auto tokens = tokenize(line);
  require_arity(tokens, expected_arity + 1, line_no, "frame");
  const std::string ctx = location(line_no) + "frame";
  InclinationFrame frame;
  frame.timestamp = parse_double(tokens[0], ctx + " timestamp");
  frame.phis = parse_block(tokens, 1, expected_arity, ctx);
  for (Eigen::Index i = 0; i < frame.phis.size(); ++i) {
    const double phi = frame.phis[i];
    if (!(phi >= 0.0 && phi <= kPi)) {
      raise(ErrorCode::Parse, ctx + ": phi[" + std::to_string(i) + "] = " +
                                  format_double(phi) + " outside [0, pi]");
    }
  }
  return frame;
}

std::string render_estimate(const EstimateRecord& rec) {
  std::string out = format_double(rec.timestamp);
  out += ' ';
  out += rec.converged ? '1' : '0';
  out += ' ';
  out += format_double(rec.energy);
  for (Eigen::Index i = 0; i < rec.nodes.size(); ++i) {
    out += ' ';
    out += format_double(rec.nodes[i]);
  }
  return out;
}

EstimateRecord parse_estimate(std::string_view line, std::size_t node_count,
                              std::size_t line_no) {
  const auto tokens = tokenize(line);
  require_arity(tokens, 3 + 3 * node_count, line_no, "estimate record");
  const std::string ctx = location(line_no) + "estimate record";
  EstimateRecord rec;
  rec.timestamp = parse_double(tokens[0], ctx + " timestamp");
  if (tokens[1] == "1") {
    rec.converged = true;
  } else if (tokens[1] == "0") {
    rec.converged = false;
  } else {
    raise(ErrorCode::Parse, ctx + ": converged flag must be 0 or 1, got '" +
                                std::string(tokens[1]) + "'");
  }
  rec.energy = parse_double(tokens[2], ctx + " energy");
  rec.nodes = parse_block(tokens, 3, 3 * node_count, ctx);
  return rec;
}

std::string render_truth(const TruthRecord& rec) {
  std::string out = format_double(rec.timestamp);
  auto append = [&out](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out += ' ';
      out += format_double(v[i]);
    }
  };
  append(rec.nodes);
  append(rec.thetas);
  append(rec.phis);
  return out;
}

TruthRecord parse_truth(std::string_view line, std::size_t strut_count,
                        std::size_t line_no) {
  const auto tokens = tokenize(line);
  const std::size_t n = 2 * strut_count;
  require_arity(tokens, 1 + 3 * n + 2 * strut_count, line_no, "truth record");
  const std::string ctx = location(line_no) + "truth record";
  TruthRecord rec;
  rec.timestamp = parse_double(tokens[0], ctx + " timestamp");
  rec.nodes = parse_block(tokens, 1, 3 * n, ctx);
  rec.thetas = parse_block(tokens, 1 + 3 * n, strut_count, ctx);
  rec.phis = parse_block(tokens, 1 + 3 * n + strut_count, strut_count, ctx);
  return rec;
}

StructureSpec parse_spec_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Parse, std::string("spec file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) raise(ErrorCode::Parse, "spec file: top level must be an object");
  StructureSpec spec;
  try {
    spec.name = doc.value("name", std::string());
    const auto& lengths = doc.at("strut_lengths");
    if (!lengths.is_array()) raise(ErrorCode::Parse, "spec file: strut_lengths must be an array");
    for (const auto& v : lengths) spec.strut_lengths.push_back(v.get<double>());
    const auto& cables = doc.at("cables");
    if (!cables.is_array()) raise(ErrorCode::Parse, "spec file: cables must be an array");
    for (const auto& c : cables) {
      CableSpec cs;
      cs.node_a = c.at("a").get<int>();
      cs.node_b = c.at("b").get<int>();
      cs.stiffness = c.at("k").get<double>();
      cs.rest_length = c.value("b0", 0.0);
      spec.cables.push_back(cs);
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Parse, std::string("spec file: ") + e.what());
  }
  return spec;
}

std::string spec_to_json(const StructureSpec& spec) {
  nlohmann::json doc;
  doc["name"] = spec.name;
  doc["strut_lengths"] = spec.strut_lengths;
  auto& cables = doc["cables"] = nlohmann::json::array();
  for (const auto& c : spec.cables) {
    cables.push_back({{"a", c.node_a}, {"b", c.node_b}, {"k", c.stiffness}, {"b0", c.rest_length}});
  }
  return doc.dump(2) + "\n";
}

StructureSpec load_spec_file(const std::string& path) {
  if (path == "builtin:prism") return builtin_prism();
  if (path == "builtin:taut-prism") return taut_prism();
  if (path.rfind("builtin:", 0) == 0) {
    raise(ErrorCode::InvalidArgument,
          "unknown builtin spec '" + path + "' (known: builtin:prism, builtin:taut-prism)");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_json(buf.str());
}

void save_spec_file(const StructureSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot open for writing: " + path);
  out << spec_to_json(spec);
  if (!out.flush()) raise(ErrorCode::Io, "write failed: " + path);
}

}  // namespace tsg
