#pragma once

// Batch run orchestration: bracket construction and checks, extremal solves,
// probe, and the artifact files (CSV, JSON-lines, summary).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "monovi/assembly.hpp"
#include "monovi/config.hpp"
#include "monovi/error.hpp"
#include "monovi/expression.hpp"
#include "monovi/iteration.hpp"
#include "monovi/mesh.hpp"
#include "monovi/verify.hpp"

namespace monovi {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_solver = 3, exit_certificate = 4 };

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

struct RunResult {
  int exit_code = exit_ok;
  std::string error_kind;  // empty on success
  std::string message;
  nlohmann::json summary;
  std::filesystem::path output_dir;
};

namespace detail {

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Write-then-rename so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out << content;
    if (!out.flush()) throw Error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string solution_csv(const Mesh& mesh, std::span<const double> u, std::span<const double> v) {
  std::ostringstream os;
  os << (mesh.dim() == 1 ? "node_index,x,u,v\n" : "node_index,x,y,u,v\n");
  for (std::size_t i = 0; i < u.size(); ++i) {
    os << i << ',' << fmt17(mesh.nodes()[i][0]) << ',';
    if (mesh.dim() == 2) os << fmt17(mesh.nodes()[i][1]) << ',';
    os << fmt17(u[i]) << ',' << fmt17(v[i]) << '\n';
  }
  return os.str();
}

inline std::string convergence_jsonl(const SolveReport& r) {
  std::string out;
  for (const auto& s : r.steps) {
    nlohmann::json j{{"n", s.n},
                     {"sup_increment", s.sup_increment},
                     {"mono_margin", s.mono_margin},
                     {"inner_iters", s.inner_iterations},
                     {"energy", s.energy}};
    out += j.dump() + "\n";
  }
  return out;
}

/// u and v columns of a CSV in the solution layout.
inline std::pair<NodalField, NodalField> read_solution_csv(const std::string& path, std::size_t nodes) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read bracket file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("bracket file '" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::optional<std::size_t> cu, cv;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "u") cu = k;
    if (header[k] == "v") cv = k;
  }
  if (!cu || !cv) throw ConfigError("bracket file '" + path + "' needs columns u and v");
  NodalField u, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw ConfigError("bracket file '" + path + "': ragged row");
    try {
      u.push_back(std::stod(cells[*cu]));
      v.push_back(std::stod(cells[*cv]));
    } catch (const std::exception&) {
      throw ConfigError("bracket file '" + path + "': bad number");
    }
  }
  if (u.size() != nodes) {
    throw ConfigError("bracket file '" + path + "' has " + std::to_string(u.size()) + " rows, mesh has " +
                      std::to_string(nodes) + " nodes");
  }
  return {std::move(u), std::move(v)};
}

inline std::pair<NodalField, NodalField> bracket_end(const DiscreteProblem& P, const RunConfig& c,
                                                     const BracketEndConfig& b, bool upper) {
  if (b.kind == "helper") {
    return upper ? linear_bracket_helper(P, b.c, c.bracket_tol, c.tol.inner())
                 : lower_bracket_helper(P, b.c, c.bracket_tol, c.tol.inner());
  }
  if (b.kind == "file") return read_solution_csv(b.path, P.size());
  if (b.kind == "zero") return zero_bracket_end(P);
  const Expression eu(b.u_expr);
  NodalField u = interpolate(P.mesh(), [&](const Vec2& x) { return eu(x[0], x[1]); });
  NodalField v(P.size());
  if (b.v_expr.empty()) {
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = upper ? P.graph().h().left(u[i]) : P.graph().h().right(u[i]);
  } else {
    const Expression ev(b.v_expr);
    v = interpolate(P.mesh(), [&](const Vec2& x) { return ev(x[0], x[1]); });
  }
  return {std::move(u), std::move(v)};
}

inline nlohmann::json to_json(const BracketCheckReport& r) {
  return {{"kind", r.kind},
          {"tol", r.tol},
          {"membership_margin", r.membership_margin},
          {"boundary_margin", r.boundary_margin},
          {"residual_margin", r.residual_margin},
          {"worst_node", r.worst_node},
          {"finite", r.finite},
          {"passed", r.passed}};
}

inline nlohmann::json to_json(const SolveReport& r, const IterationTolerances& t) {
  std::size_t inner = 0;
  for (const auto& s : r.steps) inner += s.inner_iterations;
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);
  return {{"direction", to_string(r.direction)},
          {"outer_iterations", r.outer_iterations},
          {"inner_iterations_total", inner},
          {"final_sup_increment", r.steps.empty() ? 0.0 : r.steps.back().sup_increment},
          {"max_mono_margin", {{"achieved", r.max_mono_margin}, {"tol", t.mono}}},
          {"certificate",
           {{"membership_distance", r.certificate.membership_distance},
            {"worst_node", r.certificate.worst_node},
            {"stationarity", r.certificate.stationarity},
            {"tol", r.certificate.tol},
            {"passed", r.certificate.passed}}},
          {"fixed_point_residual", {{"achieved", r.fixed_point_residual}, {"tol", 2.0 * t.outer}}},
          {"energy_bounds_hold", r.bounds_ok},
          {"warnings", warnings},
          {"passed", r.passed(t)}};
}

inline nlohmann::json tolerances_json(const RunConfig& c) {
  return {{"outer", c.tol.outer},     {"stat", c.tol.stat},           {"mono", c.tol.mono},
          {"member", c.tol.member},   {"contain", c.tol.contain},     {"bracket", c.bracket_tol},
          {"probe", c.probe_tol},     {"max_outer", c.tol.max_outer}, {"max_inner", c.tol.vi.max_iterations}};
}

}  // namespace detail

/// Executes one configured run and writes its artifacts. Never throws for
/// configuration, solver or certificate problems; those map to exit codes.
inline RunResult run(RunConfig cfg, const RunOptions& opt = {}) {
  using nlohmann::json;
  RunResult res;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.output_dir) cfg.output_dir = *opt.output_dir;
  res.output_dir = cfg.output_dir;

  json& S = res.summary;
  S["version"] = kVersion;
  S["schema_version"] = kSchemaVersion;
  S["seed"] = cfg.seed;
  S["config"] = cfg.source;
  S["config_hash"] = detail::hex64(detail::fnv1a(cfg.source.dump() + "#seed=" + std::to_string(cfg.seed)));
  S["tolerances"] = detail::tolerances_json(cfg);
  json timings;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count(); };

  auto fail = [&](int code, const std::string& kind, const std::string& msg) {
    res.exit_code = code;
    res.error_kind = kind;
    res.message = msg;
  };

  std::optional<DiscreteProblem> P;
  try {
    Mesh mesh = build_mesh(cfg.mesh);
    OperatorSpec op = make_operator(cfg);
    if (cfg.operator_name == "weighted_p_laplacian") {
      const Expression weight(cfg.weight);
      for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double w = weight(mesh.centroid(e)[0], mesh.centroid(e)[1]);
        if (!(w >= cfg.weight_min && w <= cfg.weight_max)) {
          throw ConfigError("operator.weight: value " + std::to_string(w) + " on element " + std::to_string(e) +
                            " is outside [weight_min, weight_max]");
        }
      }
    }
    P.emplace(std::move(mesh), std::move(op),
              Decomposition{PiecewiseFunction(cfg.g), PiecewiseFunction(cfg.h), cfg.g_side});
    S["normalization_shift"] = P->normalization_shift();
    const auto dec = validate_decomposition(P->decomposition());
    S["invariants"]["decomposition_monotone"] = dec.passed();
    const auto opv = validate(P->op(), 200, cfg.seed, {cfg.mesh.x0, cfg.mesh.y0}, {cfg.mesh.x1, cfg.mesh.y1});
    S["invariants"]["operator_structure"] = {{"coercivity_margin", opv.coercivity_margin},
                                             {"monotonicity_margin", opv.monotonicity_margin},
                                             {"growth_margin", opv.growth_margin},
                                             {"potential_error", opv.potential_error},
                                             {"passed", opv.passed()}};
    if (!opv.passed()) throw ConfigError("operator: sampled structural checks failed");
  } catch (const ConfigError& e) {
    fail(exit_config, "config", e.what());
  } catch (const InvalidArgument& e) {
    fail(exit_config, "config", e.what());
  }

  std::optional<Bracket> B;
  if (res.exit_code == exit_ok) {
    try {
      auto [uu, uv] = detail::bracket_end(*P, cfg, cfg.upper, true);
      auto [lu, lv] = detail::bracket_end(*P, cfg, cfg.lower, false);
      B = make_bracket(*P, std::move(lu), std::move(lv), std::move(uu), std::move(uv), cfg.bracket_tol);
      S["bracket"] = {{"upper", detail::to_json(B->upper_report)},
                      {"lower", detail::to_json(B->lower_report)},
                      {"order_margin", B->order_margin},
                      {"verified", B->verified},
                      {"waived", cfg.waive_verification}};
      if (!B->verified && !cfg.waive_verification) {
        fail(exit_certificate, "bracket", "bracket verification failed");
      }
    } catch (const ConfigError& e) {
      fail(exit_config, "config", e.what());
    } catch (const SolverFailure& e) {
      fail(exit_solver, "solver", e.what());
    } catch (const Error& e) {
      fail(exit_certificate, "bracket", e.what());
    }
    timings["bracket_seconds"] = elapsed();
  }

  std::vector<std::pair<std::string, Direction>> dirs;
  if (cfg.direction != "minimal") dirs.emplace_back("maximal", Direction::from_upper);
  if (cfg.direction != "maximal") dirs.emplace_back("minimal", Direction::from_lower);
  std::vector<SolveReport> reports;
  std::vector<std::pair<std::string, std::string>> files;

  if (res.exit_code == exit_ok) {
    try {
      for (const auto& [name, dir] : dirs) {
        SolveReport r = solve_extremal(*P, *B, dir, cfg.tol, cfg.waive_verification);
        S["solves"][name] = detail::to_json(r, cfg.tol);
        timings[name + "_seconds"] = r.wall_seconds;
        files.emplace_back("solution_" + name + ".csv", detail::solution_csv(P->mesh(), r.u_final, r.v_final));
        files.emplace_back("convergence_" + name + ".jsonl", detail::convergence_jsonl(r));
        if (!r.passed(cfg.tol) && res.exit_code == exit_ok) {
          fail(exit_certificate, "certificate", name + " solution fails its certificate checks");
        }
        reports.push_back(std::move(r));
      }
      if (dirs.size() == 2) {
        const auto& umax = reports[0].u_final;
        const auto& umin = reports[1].u_final;
        S["order"] = {{"min_le_max_margin", -max_excess(umin, umax)}, {"passed", compare(umin, umax, cfg.tol.outer)}};
        if (!compare(umin, umax, cfg.tol.outer) && res.exit_code == exit_ok) {
          fail(exit_certificate, "probe", "minimal solution exceeds maximal solution");
        }
        std::vector<NodalField> cands{umax, umin};
        std::vector<std::size_t> picard;
        if (cfg.random_starts > 0) {
          const auto t0 = elapsed();
          auto found = random_fixed_points(*P, *B, cfg.random_starts, cfg.seed, cfg.tol);
          for (auto& s : found.solutions) cands.push_back(std::move(s));
          picard = found.iterations;
          timings["probe_seconds"] = elapsed() - t0;
        }
        const auto pr = maximality_probe(*P, umin, umax, cands, cfg.probe_tol, cfg.tol.member);
        json cj = json::array();
        for (const auto& c : pr.candidates) {
          cj.push_back({{"certified", c.certified},
                        {"membership_distance", c.membership_distance},
                        {"below_min", c.below_min},
                        {"above_max", c.above_max},
                        {"worst_node", c.worst_node}});
        }
        S["probe"] = {{"random_starts", cfg.random_starts},
                      {"picard_iterations", picard},
                      {"candidates", cj},
                      {"tol", cfg.probe_tol},
                      {"passed", pr.passed},
                      {"failure", pr.failure}};
        if (!pr.passed && res.exit_code == exit_ok) fail(exit_certificate, "probe", pr.failure);
      }
    } catch (const SolverFailure& e) {
      fail(exit_solver, "solver", e.what());
    } catch (const InvalidArgument& e) {
      fail(exit_config, "config", e.what());
    } catch (const Error& e) {
      fail(exit_solver, "solver", e.what());
    }
  }

  S["status"] = res.exit_code == exit_ok ? "ok" : "error";
  S["exit_code"] = res.exit_code;
  if (res.exit_code != exit_ok) S["error"] = {{"kind", res.error_kind}, {"message", res.message}};
  timings["total_seconds"] = elapsed();

  try {
    std::filesystem::create_directories(res.output_dir);
    for (const auto& [name, content] : files) detail::write_atomic(res.output_dir / name, content);
    detail::write_atomic(res.output_dir / "summary.json", S.dump(2) + "\n");
    detail::write_atomic(res.output_dir / "timings.json", timings.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (res.exit_code == exit_ok) fail(exit_solver, "io", e.what());
  }
  return res;
}

/// Loads and runs a config file; schema errors become exit code 2.
inline RunResult run_file(const std::string& path, const RunOptions& opt = {}) {
  try {
    return run(load_config(path), opt);
  } catch (const ConfigError& e) {
    RunResult r;
    r.exit_code = exit_config;
    r.error_kind = "config";
    r.message = e.what();
    return r;
  }
}

}  // namespace monovi
