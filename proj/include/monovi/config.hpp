#pragma once

// JSON run configuration: parsing, schema checks and conversion to library
// objects. Unknown keys are rejected at every level.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "monovi/error.hpp"
#include "monovi/expression.hpp"
#include "monovi/iteration.hpp"
#include "monovi/mesh.hpp"
#include "monovi/monotone_graph.hpp"
#include "monovi/nonlinearity.hpp"
#include "monovi/operator.hpp"

namespace monovi {

/// Malformed or out-of-schema configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

struct BracketEndConfig {
  std::string kind;  // helper | expression | file | zero
  double c = 0.0;
  std::string u_expr;
  std::string v_expr;  // optional; empty selects h^- (upper) or h^+ (lower)
  std::string path;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  MeshConfig mesh;
  std::string operator_name = "p_laplacian";
  double p = 2.0;
  std::string weight = "1";
  double weight_min = 1.0, weight_max = 1.0;
  PiecewiseSpec g, h;
  Side g_side = Side::right;
  BracketEndConfig upper{"helper", 0.0, "", "", ""};
  BracketEndConfig lower{"zero", 0.0, "", "", ""};
  bool waive_verification = false;
  IterationTolerances tol;
  double bracket_tol = 1e-9;
  std::string direction = "maximal";  // maximal | minimal | both
  std::size_t random_starts = 0;
  double probe_tol = 1e-6;
  std::string output_dir = "monovi_out";
  nlohmann::json source;  // the document as read
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return get_number(obj, key, where, 0.0);
}

inline std::size_t get_count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& where, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& obj, const char* key, const std::string& where,
                                       std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

/// A number is shorthand for a constant function.
inline PiecewiseSpec parse_piecewise(const json& v, const std::string& where) {
  if (v.is_number()) return PiecewiseSpec{v.get<double>(), {}, {0.0}, {}};
  check_keys(v, {"value_at_zero", "breakpoints", "slopes", "jumps"}, where);
  PiecewiseSpec s;
  s.value_at_zero = get_number(v, "value_at_zero", where, 0.0);
  s.breakpoints = get_numbers(v, "breakpoints", where, {});
  s.slopes = get_numbers(v, "slopes", where, std::vector<double>(s.breakpoints.size() + 1, 0.0));
  if (v.contains("jumps")) {
    const json& js = v.at("jumps");
    if (!js.is_array()) throw ConfigError(where + ".jumps: expected an array of [at, height] pairs");
    for (const auto& j : js) {
      if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(where + ".jumps: expected an array of [at, height] pairs");
      }
      s.jumps.push_back(Jump{j[0].get<double>(), j[1].get<double>()});
    }
  }
  try {
    (void)PiecewiseFunction(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

inline BracketEndConfig parse_bracket_end(const json& v, const std::string& where) {
  BracketEndConfig b;
  if (!v.is_object()) throw ConfigError(where + ": expected an object");
  b.kind = get_string(v, "kind", where, "");
  if (b.kind == "helper") {
    check_keys(v, {"kind", "c"}, where);
    b.c = require_number(v, "c", where);
  } else if (b.kind == "expression") {
    check_keys(v, {"kind", "u", "v"}, where);
    b.u_expr = get_string(v, "u", where, "");
    b.v_expr = get_string(v, "v", where, "");
    if (b.u_expr.empty()) throw ConfigError(where + ": missing key 'u'");
    try {
      (void)Expression(b.u_expr);
      if (!b.v_expr.empty()) (void)Expression(b.v_expr);
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else if (b.kind == "file") {
    check_keys(v, {"kind", "path"}, where);
    b.path = get_string(v, "path", where, "");
    if (b.path.empty()) throw ConfigError(where + ": missing key 'path'");
  } else if (b.kind == "zero") {
    check_keys(v, {"kind"}, where);
  } else {
    throw ConfigError(where + ".kind: expected helper, expression, file or zero");
  }
  return b;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::check_keys;
  using detail::get_count;
  using detail::get_number;
  using detail::get_string;
  RunConfig c;
  c.source = doc;
  check_keys(doc, {"schema_version", "seed", "mesh", "operator", "nonlinearity", "bracket", "tolerances", "direction",
                   "probe", "output"},
             "config");
  if (!doc.contains("schema_version")) throw ConfigError("config: missing key 'schema_version'");
  if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != kSchemaVersion) {
    throw ConfigError("config.schema_version: expected " + std::to_string(kSchemaVersion));
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("config.seed: expected a nonnegative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (!doc.contains("mesh")) throw ConfigError("config: missing key 'mesh'");
  const auto& m = doc.at("mesh");
  check_keys(m, {"dim", "x0", "x1", "y0", "y1", "n", "nx", "ny"}, "mesh");
  const auto dim = get_count(m, "dim", "mesh", 1);
  if (dim != 1 && dim != 2) throw ConfigError("mesh.dim: expected 1 or 2");
  c.mesh.dim = static_cast<int>(dim);
  c.mesh.x0 = get_number(m, "x0", "mesh", 0.0);
  c.mesh.x1 = get_number(m, "x1", "mesh", 1.0);
  if (dim == 1) {
    if (m.contains("y0") || m.contains("y1") || m.contains("ny")) throw ConfigError("mesh: y0, y1, ny need dim = 2");
    if (m.contains("n") && m.contains("nx")) throw ConfigError("mesh: give n or nx, not both");
    c.mesh.nx = m.contains("n") ? get_count(m, "n", "mesh", 0) : get_count(m, "nx", "mesh", 0);
    if (c.mesh.nx == 0) throw ConfigError("mesh: missing key 'n'");
  } else {
    if (m.contains("n")) throw ConfigError("mesh.n: use nx and ny in 2D");
    c.mesh.y0 = get_number(m, "y0", "mesh", 0.0);
    c.mesh.y1 = get_number(m, "y1", "mesh", 1.0);
    c.mesh.nx = get_count(m, "nx", "mesh", 0);
    c.mesh.ny = get_count(m, "ny", "mesh", 0);
  }
  if (c.mesh.nx < 2 || (dim == 2 && c.mesh.ny < 2)) throw ConfigError("mesh: need at least 2 cells per direction");
  if (!(c.mesh.x1 > c.mesh.x0) || (dim == 2 && !(c.mesh.y1 > c.mesh.y0))) {
    throw ConfigError("mesh: require x0 < x1 and y0 < y1");
  }

  if (!doc.contains("operator")) throw ConfigError("config: missing key 'operator'");
  const auto& op = doc.at("operator");
  c.operator_name = get_string(op, "name", "operator", "p_laplacian");
  if (c.operator_name == "p_laplacian") {
    check_keys(op, {"name", "p"}, "operator");
  } else if (c.operator_name == "weighted_p_laplacian") {
    check_keys(op, {"name", "p", "weight", "weight_min", "weight_max"}, "operator");
    c.weight = get_string(op, "weight", "operator", "");
    if (c.weight.empty()) throw ConfigError("operator: missing key 'weight'");
    try {
      (void)Expression(c.weight);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("operator.weight: ") + e.what());
    }
    c.weight_min = detail::require_number(op, "weight_min", "operator");
    c.weight_max = detail::require_number(op, "weight_max", "operator");
    if (!(c.weight_min > 0.0) || !(c.weight_max >= c.weight_min)) {
      throw ConfigError("operator: require 0 < weight_min <= weight_max");
    }
  } else {
    throw ConfigError("operator.name: expected p_laplacian or weighted_p_laplacian");
  }
  c.p = detail::require_number(op, "p", "operator");
  if (!(c.p > 1.0) || !std::isfinite(c.p)) throw ConfigError("operator.p: must be > 1");

  if (!doc.contains("nonlinearity")) throw ConfigError("config: missing key 'nonlinearity'");
  const auto& nl = doc.at("nonlinearity");
  check_keys(nl, {"g", "h", "g_side"}, "nonlinearity");
  if (!nl.contains("g")) throw ConfigError("nonlinearity: missing key 'g'");
  c.g = detail::parse_piecewise(nl.at("g"), "nonlinearity.g");
  c.h = nl.contains("h") ? detail::parse_piecewise(nl.at("h"), "nonlinearity.h") : PiecewiseSpec{};
  const auto side = get_string(nl, "g_side", "nonlinearity", "right");
  if (side != "right" && side != "left") throw ConfigError("nonlinearity.g_side: expected right or left");
  c.g_side = side == "right" ? Side::right : Side::left;
  if (!PiecewiseFunction(c.g).nondecreasing()) throw ConfigError("nonlinearity.g: must be nondecreasing");
  if (!PiecewiseFunction(c.h).nondecreasing()) throw ConfigError("nonlinearity.h: must be nondecreasing");

  if (doc.contains("bracket")) {
    const auto& b = doc.at("bracket");
    check_keys(b, {"upper", "lower", "waive_verification", "tol"}, "bracket");
    if (b.contains("upper")) c.upper = detail::parse_bracket_end(b.at("upper"), "bracket.upper");
    if (b.contains("lower")) c.lower = detail::parse_bracket_end(b.at("lower"), "bracket.lower");
    if (b.contains("waive_verification")) {
      if (!b.at("waive_verification").is_boolean()) throw ConfigError("bracket.waive_verification: expected a boolean");
      c.waive_verification = b.at("waive_verification").get<bool>();
    }
    c.bracket_tol = get_number(b, "tol", "bracket", c.bracket_tol);
  }
  if (c.upper.kind == "helper" && !doc.contains("bracket")) {
    throw ConfigError("config: missing key 'bracket' (the upper solution needs a constant c)");
  }

  c.tol = IterationTolerances::for_dimension(c.mesh.dim);
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    check_keys(t, {"outer", "stat", "mono", "member", "contain", "max_outer", "max_inner"}, "tolerances");
    if (t.contains("outer")) c.tol = IterationTolerances::from_outer(get_number(t, "outer", "tolerances", 0.0));
    c.tol.stat = get_number(t, "stat", "tolerances", c.tol.stat);
    c.tol.mono = get_number(t, "mono", "tolerances", c.tol.mono);
    c.tol.member = get_number(t, "member", "tolerances", c.tol.member);
    c.tol.contain = get_number(t, "contain", "tolerances", c.tol.contain);
    c.tol.max_outer = get_count(t, "max_outer", "tolerances", c.tol.max_outer);
    c.tol.vi.max_iterations = get_count(t, "max_inner", "tolerances", c.tol.vi.max_iterations);
  }
  for (double v : {c.tol.outer, c.tol.stat, c.tol.mono, c.tol.member, c.tol.contain, c.bracket_tol}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("tolerances: every tolerance must be positive and finite");
  }
  if (c.tol.max_outer == 0 || c.tol.vi.max_iterations == 0) throw ConfigError("tolerances: iteration caps must be >= 1");

  c.direction = get_string(doc, "direction", "config", "maximal");
  if (c.direction != "maximal" && c.direction != "minimal" && c.direction != "both") {
    throw ConfigError("config.direction: expected maximal, minimal or both");
  }
  if (doc.contains("probe")) {
    const auto& pr = doc.at("probe");
    check_keys(pr, {"random_starts", "tol"}, "probe");
    c.random_starts = get_count(pr, "random_starts", "probe", 0);
    c.probe_tol = get_number(pr, "tol", "probe", c.probe_tol);
    if (!(c.probe_tol > 0.0)) throw ConfigError("probe.tol: must be positive");
  }
  if (c.random_starts > 0 && c.direction != "both") throw ConfigError("probe: random starts need direction = both");
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, {"dir"}, "output");
    c.output_dir = get_string(o, "dir", "output", c.output_dir);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

/// The operator a configuration describes.
inline OperatorSpec make_operator(const RunConfig& c) {
  if (c.operator_name == "p_laplacian") return plaplacian(c.p);
  const Expression w(c.weight);
  return weighted_plaplacian(c.p, [w](const Vec2& x) { return w(x[0], x[1]); }, c.weight_min, c.weight_max);
}

}  // namespace monovi
