#pragma once

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/expression.hpp"
#include "ubve/format.hpp"
#include "ubve/heat.hpp"
#include "ubve/io.hpp"
#include "ubve/laplace.hpp"
#include "ubve/oracles.hpp"
#include "ubve/surface_io.hpp"

namespace ubve::cli {

using nlohmann::json;

enum ExitCode : int { ok = 0, inconsistent = 1, invalid_input = 2, numeric_failure = 3 };

/// One job: a command plus everything it reads. Mirrors the JSON job file;
/// command-line flags produce the same JSON keys.
struct JobConfig {
  std::string command;
  json surface;  // path string or inline descriptor
  std::optional<std::array<int, 2>> grid;
  std::string oracle;
  std::string u0, u1;
  std::optional<double> source;
  std::string given;
  std::string points;
  std::optional<double> tol;
  double eq3_tol = 1e-8;
  std::string output_dir;
  double poisson_sign = 1.0;
  std::array<int, 3> volume_grid{24, 24, 48};
  bool allow_inconsistent = false;
  double regularization = 1e-10;
  double mean = 0.0;
  double tmax = 1.0;
  int nt = 64;
  std::optional<double> xmax;
  int nx = 512;
  std::string v, phi, psi;
  std::string decay;
  std::string v_tail;
  std::string target;
  QuadratureConfig quadrature;
  std::string op;
  std::vector<std::string> grids;

  static const std::set<std::string>& keys() {
    static const std::set<std::string> k = {
        "command", "surface", "grid", "oracle", "u0", "u1", "source", "given", "points", "tol",
        "eq3_tol", "output_dir", "poisson_sign", "volume_grid", "allow_inconsistent",
        "regularization", "mean", "tmax", "nt", "xmax", "nx", "v", "phi", "psi", "decay",
        "v_tail", "target", "gauss_nodes", "start_panels", "op", "grids"};
    return k;
  }

  static JobConfig from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("job config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!keys().count(it.key())) throw InvalidArgument("unknown job key '" + it.key() + "'");
    JobConfig c;
    try {
      c.command = j.at("command").get<std::string>();
      if (j.contains("surface")) c.surface = j["surface"];
      if (j.contains("grid")) c.grid = parse_grid(j["grid"]);
      auto str = [&](const char* k, std::string& dst) {
        if (j.contains(k)) dst = j[k].get<std::string>();
      };
      auto num = [&](const char* k, auto& dst) {
        if (j.contains(k)) dst = j[k].get<std::decay_t<decltype(dst)>>();
      };
      str("oracle", c.oracle);
      str("u0", c.u0);
      str("u1", c.u1);
      if (j.contains("source")) c.source = j["source"].get<double>();
      str("given", c.given);
      str("points", c.points);
      if (j.contains("tol")) c.tol = j["tol"].get<double>();
      num("eq3_tol", c.eq3_tol);
      str("output_dir", c.output_dir);
      num("poisson_sign", c.poisson_sign);
      if (j.contains("volume_grid")) c.volume_grid = j["volume_grid"].get<std::array<int, 3>>();
      num("allow_inconsistent", c.allow_inconsistent);
      num("regularization", c.regularization);
      num("mean", c.mean);
      num("tmax", c.tmax);
      num("nt", c.nt);
      if (j.contains("xmax")) c.xmax = j["xmax"].get<double>();
      num("nx", c.nx);
      str("v", c.v);
      str("phi", c.phi);
      str("psi", c.psi);
      str("decay", c.decay);
      str("v_tail", c.v_tail);
      str("target", c.target);
      num("gauss_nodes", c.quadrature.gauss_nodes);
      num("start_panels", c.quadrature.singular_start_panels);
      str("op", c.op);
      if (j.contains("grids")) {
        if (j["grids"].is_string()) c.grids = split(j["grids"].get<std::string>(), ',');
        else
          for (const auto& g : j["grids"])
            c.grids.push_back(g.is_string() ? g.get<std::string>() : std::to_string(g.get<int>()));
      }
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("job config: ") + e.what());
    }
    if (c.tol && !(*c.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (!(c.eq3_tol > 0.0)) throw InvalidArgument("eq3 tolerance must be positive");
    return c;
  }

  static std::array<int, 2> parse_grid(const json& g) {
    if (g.is_array() && g.size() == 2) return {g[0].get<int>(), g[1].get<int>()};
    if (g.is_string()) return parse_grid_token(g.get<std::string>());
    throw InvalidArgument("grid must be [n_theta, n_phi] or \"NTxNP\"");
  }

  /// "32x64" or "32" (n_phi = 2 n_theta).
  static std::array<int, 2> parse_grid_token(const std::string& s) {
    try {
      const auto x = s.find('x');
      if (x == std::string::npos) {
        const int n = std::stoi(s);
        return {n, 2 * n};
      }
      return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (const std::exception&) {
      throw InvalidArgument("bad grid token '" + s + "'");
    }
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == sep) {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else if (ch != ' ') {
        cur += ch;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }
};

namespace detail {

inline std::filesystem::path output_dir(const JobConfig& c) {
  std::string dir = c.output_dir;
  if (dir.empty()) {
    const char* env = std::getenv("UBVP_OUTPUT_DIR");
    dir = env && *env ? env : ".";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
}

template <class Writer>
inline void write_file(const std::filesystem::path& path, Writer&& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  w(out);
}

inline Surface load_job_surface(const JobConfig& c, std::optional<std::array<int, 2>> grid = {}) {
  if (!grid) grid = c.grid;
  json desc = c.surface;
  if (desc.is_null()) throw InvalidArgument("a surface is required (--surface)");
  if (desc.is_string()) {
    const std::string path = desc.get<std::string>();
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".off") == 0) {
      if (grid) throw InvalidArgument("grid overrides apply only to analytic surfaces");
      return load_surface(path);
    }
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open surface file '" + path + "'");
    try {
      in >> desc;
    } catch (const json::exception& e) {
      throw InvalidArgument("surface descriptor '" + path + "': " + e.what());
    }
  }
  if (grid) desc["grid"] = {(*grid)[0], (*grid)[1]};
  return surface_from_json(desc);
}

inline json surface_summary(const Surface& s) {
  return {{"kind", to_string(s.kind())}, {"nodes", s.size()}, {"area", s.area()}};
}

inline std::pair<BoundaryTrace, BoundaryTrace> laplace_inputs(const JobConfig& c, const Surface& s,
                                                              bool need_u0, bool need_u1) {
  if (!c.oracle.empty()) {
    if (!c.u0.empty() || !c.u1.empty())
      throw InvalidArgument("oracle and trace files are mutually exclusive");
    return harmonic_traces(harmonic_oracle(c.oracle), s);
  }
  if (need_u0 && c.u0.empty()) throw InvalidArgument("u0 trace required (--u0 or --oracle)");
  if (need_u1 && c.u1.empty()) throw InvalidArgument("u1 trace required (--u1 or --oracle)");
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());
  Vector u0 = c.u0.empty() ? Vector::Zero(n) : read_trace_csv(c.u0, s);
  Vector u1 = c.u1.empty() ? Vector::Zero(n) : read_trace_csv(c.u1, s);
  return {BoundaryTrace::on(s, std::move(u0), TraceRole::dirichlet),
          BoundaryTrace::on(s, std::move(u1), TraceRole::neumann)};
}

inline void write_surface_residual(const std::filesystem::path& path, const ResidualReport& rep,
                                   const Surface& s) {
  write_file(path, [&](std::ostream& o) {
    write_residual_csv(o, rep, "x,y,z", [&](Eigen::Index i) {
      const Point& p = s.node(static_cast<std::size_t>(i));
      return format_double(p.x()) + "," + format_double(p.y()) + "," + format_double(p.z());
    });
  });
}

inline json residual_numbers(const ResidualReport& rep) {
  return {{"sup_norm", rep.sup_norm},
          {"weighted_l2", rep.weighted_l2},
          {"compatibility", rep.compatibility_values},
          {"compatibility_names", rep.compatibility_names}};
}

/// Raised when a check ends with an inconsistent report (exit 1).
struct Inconsistent {
  json payload;
};

inline int finish(const std::filesystem::path& dir, json report, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  write_text(dir / "report.json", text);
  out << text;
  return ok;
}

inline int finish_check(const std::filesystem::path& dir, json report, const ResidualReport& rep,
                        std::ostream& out) {
  finish(dir, std::move(report), out);
  if (!rep.consistent)
    throw Inconsistent{{{"error", "inconsistent"},
                        {"message", "traces do not satisfy the universal boundary equations"},
                        {"detail",
                         {{"sup_norm", rep.sup_norm},
                          {"compatibility", rep.compatibility_values},
                          {"tolerance", rep.tolerance}}}}};
  return ok;
}

inline VolumeQuadrature ball_quadrature(const JobConfig& c, const Surface& s) {
  if (s.kind() != SurfaceKind::analytic_sphere)
    throw InvalidArgument("Poisson checks need a spherical boundary (ball volume rule)");
  const AnalyticShape* sh = s.analytic();
  return make_ball_volume_quadrature(sh->semi_axes[0], sh->center, c.volume_grid[0],
                                     c.volume_grid[1], c.volume_grid[2]);
}

// --------------------------------------------------------------------------
// Laplace commands

inline int check_laplace(const JobConfig& c, std::ostream& out) {
  const Surface s = load_job_surface(c);
  const LaplaceSystem sys(s);
  const auto [u0, u1] = laplace_inputs(c, s, true, true);
  const ResidualReport rep = laplace_residual(sys, u0, u1, c.tol);
  const auto dir = output_dir(c);
  write_surface_residual(dir / "residual.csv", rep, s);
  json report = {{"command", c.command}, {"surface", surface_summary(s)}, {"residual", to_json(rep)}};
  if (!c.oracle.empty()) report["oracle"] = c.oracle;
  return finish_check(dir, std::move(report), rep, out);
}

inline int check_poisson(const JobConfig& c, std::ostream& out) {
  const Surface s = load_job_surface(c);
  VolumeQuadrature vq = ball_quadrature(c, s);
  LaplaceOptions opt;
  opt.poisson_sign = c.poisson_sign;
  const LaplaceSystem sys(s, vq, opt);
  BoundaryTrace u0, u1;
  Vector f;
  if (!c.oracle.empty()) {
    if (c.oracle != "r2") throw InvalidArgument("Poisson oracle must be 'r2' (u = |x - c|^2, f = 6)");
    if (!c.u0.empty() || !c.u1.empty() || c.source)
      throw InvalidArgument("oracle and trace files are mutually exclusive");
    PoissonData d = poisson_traces(PoissonOracle{s.analytic()->center}, s, vq);
    u0 = std::move(d.u0);
    u1 = std::move(d.u1);
    f = std::move(d.f);
  } else {
    if (!c.source) throw InvalidArgument("constant source value required (--source)");
    auto tr = laplace_inputs(c, s, true, true);
    u0 = std::move(tr.first);
    u1 = std::move(tr.second);
    f = Vector::Constant(static_cast<Eigen::Index>(vq.size()), *c.source);
  }
  const ResidualReport rep = poisson_residual(sys, u0, u1, f, c.tol);
  const auto dir = output_dir(c);
  write_surface_residual(dir / "residual.csv", rep, s);
  json report = {{"command", c.command},
                 {"surface", surface_summary(s)},
                 {"poisson_sign", c.poisson_sign},
                 {"volume_nodes", vq.size()},
                 {"residual", to_json(rep)}};
  return finish_check(dir, std::move(report), rep, out);
}

inline int solve_laplace(const JobConfig& c, std::ostream& out) {
  if (c.given != "u0" && c.given != "u1") throw InvalidArgument("--given must be u0 or u1");
  const Surface s = load_job_surface(c);
  const LaplaceSystem sys(s);
  const bool from_u1 = c.given == "u1";
  if (c.oracle.empty() && !(from_u1 ? c.u0 : c.u1).empty())
    throw InvalidArgument("only the given trace may be supplied");
  auto [u0, u1] = laplace_inputs(c, s, !from_u1, from_u1);
  const auto oracle_u0 = u0.values, oracle_u1 = u1.values;
  json report = {{"command", c.command}, {"surface", surface_summary(s)}, {"given", c.given}};
  const auto dir = output_dir(c);
  if (from_u1) {
    NeumannCompletion nc = solve_u0_from_u1(sys, u1, c.eq3_tol, c.mean);
    u0 = nc.u0;
    report["range_defect"] = nc.range_defect;
    report["nullspace_note"] = nc.nullspace_note;
    write_file(dir / "u0.csv", [&](std::ostream& o) { write_trace_csv(o, s, u0.values); });
    if (!c.oracle.empty()) {
      const double shift = (surface_integral(s, oracle_u0) - surface_integral(s, u0.values)) / s.area();
      report["oracle_error"] = sup_norm(u0.values.array() + shift - oracle_u0.array());
    }
  } else {
    u1 = solve_u1_from_u0(sys, u0, c.regularization);
    write_file(dir / "u1.csv", [&](std::ostream& o) { write_trace_csv(o, s, u1.values); });
    if (!c.oracle.empty()) report["oracle_error"] = sup_norm(u1.values - oracle_u1);
  }
  const ResidualReport rep = laplace_residual(sys, u0, u1, c.tol);
  report["residual"] = to_json(rep);
  write_surface_residual(dir / "residual.csv", rep, s);
  return finish_check(dir, std::move(report), rep, out);
}

inline int reconstruct(const JobConfig& c, std::ostream& out) {
  if (c.points.empty()) throw InvalidArgument("--points file required");
  const Surface s = load_job_surface(c);
  const LaplaceSystem sys(s);
  const auto [u0, u1] = laplace_inputs(c, s, true, true);
  const std::vector<Point> pts = read_points_csv(c.points);
  const InteriorReconstruction rec =
      reconstruct_interior(sys, u0, u1, pts, c.tol, c.allow_inconsistent);
  const auto dir = output_dir(c);
  std::size_t near = 0;
  write_file(dir / "values.csv", [&](std::ostream& o) {
    o << "x,y,z,value,near_singular\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      near += rec.evaluation.near_singular[i];
      o << format_double(pts[i].x()) << ',' << format_double(pts[i].y()) << ','
        << format_double(pts[i].z()) << ','
        << format_double(rec.evaluation.values[static_cast<Eigen::Index>(i)]) << ','
        << (rec.evaluation.near_singular[i] ? 1 : 0) << '\n';
    }
  });
  json report = {{"command", c.command},
                 {"surface", surface_summary(s)},
                 {"points", pts.size()},
                 {"near_singular_points", near},
                 {"trace_check", to_json(rec.trace_check)}};
  if (!c.oracle.empty()) {
    const HarmonicOracle o = harmonic_oracle(c.oracle);
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      err = std::max(err, std::abs(rec.evaluation.values[static_cast<Eigen::Index>(i)] - o.eval(pts[i])));
    report["oracle_error"] = err;
  }
  return finish(dir, std::move(report), out);
}

// --------------------------------------------------------------------------
// Heat commands

inline CaloricTraces heat_inputs(const JobConfig& c, bool need_phi, bool need_psi) {
  if (!c.oracle.empty()) {
    if (!c.v.empty() || !c.phi.empty() || !c.psi.empty())
      throw InvalidArgument("oracle and trace files are mutually exclusive");
    if (!(c.tmax > 0.0)) throw InvalidArgument("tmax must be positive");
    const double xmax = c.xmax.value_or(16.0 * std::sqrt(c.tmax) + 1.0);
    CaloricTraces tr = caloric_traces(caloric_oracle(c.oracle), uniform_grid(xmax, c.nx),
                                      uniform_grid(c.tmax, c.nt));
    if (!need_phi) tr.phi.reset();
    if (!need_psi) tr.psi.reset();
    return tr;
  }
  if (c.v.empty()) throw InvalidArgument("v trace required (--v or --oracle)");
  CaloricTraces tr;
  std::tie(tr.x_grid, tr.v) = read_series_csv(c.v);
  tr.decay = c.decay.empty() ? DecayTag::compactly_supported : parse_decay_tag(c.decay);
  if (!c.v_tail.empty()) tr.v_tail = compile_expression(c.v_tail, "x");
  auto load_t = [&](const std::string& path, const char* name) {
    if (path.empty()) throw InvalidArgument(std::string(name) + " trace file required");
    auto [g, vals] = read_series_csv(path);
    if (tr.t_grid.size() == 0) tr.t_grid = g;
    else if (g.size() != tr.t_grid.size() || (g - tr.t_grid).cwiseAbs().maxCoeff() > 0.0)
      throw InvalidArgument("phi and psi files must share one t-grid");
    return vals;
  };
  if (need_phi) tr.phi = load_t(c.phi, "phi");
  if (need_psi) tr.psi = load_t(c.psi, "psi");
  return tr;
}

inline void write_heat_residual(const std::filesystem::path& path, const ResidualReport& rep,
                                const Vector& t) {
  write_file(path, [&](std::ostream& o) {
    write_residual_csv(o, rep, "t", [&](Eigen::Index i) { return format_double(t[i]); });
  });
}

inline int check_heat(const JobConfig& c, std::ostream& out) {
  const CaloricTraces tr = heat_inputs(c, true, true);
  const ResidualReport rep = heat_residual(tr, c.quadrature, c.tol);
  const auto dir = output_dir(c);
  write_heat_residual(dir / "residual.csv", rep, tr.t_grid);
  json report = {{"command", c.command},
                 {"t_points", tr.t_grid.size()},
                 {"x_points", tr.x_grid.size()},
                 {"decay", to_string(tr.decay)},
                 {"residual", to_json(rep)}};
  if (!c.oracle.empty()) {
    report["oracle"] = c.oracle;
    report["outside_theorem_hypotheses"] = caloric_oracle(c.oracle).outside_theorem_hypotheses;
  }
  return finish_check(dir, std::move(report), rep, out);
}

inline int solve_heat(const JobConfig& c, std::ostream& out) {
  if (c.target != "phi" && c.target != "psi") throw InvalidArgument("--target must be phi or psi");
  const bool want_phi = c.target == "phi";
  CaloricTraces tr = heat_inputs(c, !want_phi, want_phi);
  std::optional<Vector> truth;
  if (!c.oracle.empty()) {
    const CaloricOracle o = caloric_oracle(c.oracle);
    truth = Vector(tr.t_grid.unaryExpr(want_phi ? o.phi : o.psi));
  }
  const Vector result = want_phi ? phi_from_v_psi(tr, c.quadrature) : psi_from_v_phi(tr, c.quadrature);
  (want_phi ? tr.phi : tr.psi) = result;
  const auto dir = output_dir(c);
  write_file(dir / (c.target + ".csv"),
             [&](std::ostream& o) { write_series_csv(o, "t", tr.t_grid, result); });
  // the completed triple is reported without a consistency verdict
  const ResidualReport rep = heat_residual(tr, c.quadrature, 1.0);
  json report = {{"command", c.command},
                 {"target", c.target},
                 {"t_points", tr.t_grid.size()},
                 {"completed_residual", residual_numbers(rep)}};
  if (truth) report["oracle_error"] = sup_norm(result - *truth);
  return finish(dir, std::move(report), out);
}

inline int reconstruct_heat(const JobConfig& c, std::ostream& out) {
  if (c.points.empty()) throw InvalidArgument("--points file required");
  const CaloricTraces tr = heat_inputs(c, false, true);
  const std::vector<SpaceTimePoint> pts = read_spacetime_csv(c.points);
  const Vector u = reconstruct_quarterplane(tr, pts, c.quadrature);
  const auto dir = output_dir(c);
  write_file(dir / "values.csv", [&](std::ostream& o) {
    o << "t,x,value\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
      o << format_double(pts[i].t) << ',' << format_double(pts[i].x) << ','
        << format_double(u[static_cast<Eigen::Index>(i)]) << '\n';
  });
  json report = {{"command", c.command}, {"points", pts.size()}};
  if (!c.oracle.empty()) {
    const CaloricOracle o = caloric_oracle(c.oracle);
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      err = std::max(err, std::abs(u[static_cast<Eigen::Index>(i)] - o.eval(pts[i].t, pts[i].x)));
    report["oracle_error"] = err;
  }
  return finish(dir, std::move(report), out);
}

// --------------------------------------------------------------------------
// Convergence studies

/// Largest |L Y - lambda_n Y| over the degree <= 3 harmonics on a sphere.
inline double sphere_spectrum_error(const Surface& s, bool double_layer) {
  if (s.kind() != SurfaceKind::analytic_sphere)
    throw InvalidArgument("spectral convergence needs a spherical surface");
  const double R = s.analytic()->semi_axes[0];
  const DenseOperator op = double_layer ? assemble_double_layer(s) : assemble_single_layer(s);
  const auto& dirs = s.unit_directions();
  double err = 0.0;
  for (int n = 0; n <= 3; ++n) {
    const double lambda = double_layer ? -2.0 * std::numbers::pi / (2 * n + 1)
                                       : 4.0 * std::numbers::pi * R / (2 * n + 1);
    for (const auto& Y : harmonic_polynomials(n)) {
      Vector y(static_cast<Eigen::Index>(s.size()));
      for (std::size_t i = 0; i < s.size(); ++i) y[static_cast<Eigen::Index>(i)] = Y(dirs[i]);
      err = std::max(err, sup_norm(op.apply(y) - lambda * y));
    }
  }
  return err;
}

inline int convergence(const JobConfig& c, std::ostream& out) {
  if (c.grids.empty()) throw InvalidArgument("--grids list required");
  static const std::set<std::string> surface_ops = {"K-eigen", "S-eigen", "laplace-residual",
                                                    "neumann-completion", "dirichlet-completion"};
  static const std::set<std::string> heat_ops = {"heat-phi", "heat-psi", "abel-roundtrip"};
  if (!surface_ops.count(c.op) && !heat_ops.count(c.op))
    throw InvalidArgument("unknown convergence op '" + c.op + "'");
  JobConfig base = c;
  if (base.surface.is_null()) base.surface = json{{"type", "sphere"}, {"radius", 1.0}};

  json rows = json::array();
  std::ostringstream csv;
  csv << "grid,size,error,ratio\n";
  double prev = 0.0;
  for (std::size_t gi = 0; gi < c.grids.size(); ++gi) {
    const std::string& g = c.grids[gi];
    double err = 0.0;
    std::size_t size = 0;
    if (surface_ops.count(c.op)) {
      const Surface s = load_job_surface(base, JobConfig::parse_grid_token(g));
      size = s.size();
      if (c.op == "K-eigen" || c.op == "S-eigen") {
        err = sphere_spectrum_error(s, c.op == "K-eigen");
      } else {
        const LaplaceSystem sys(s);
        const auto [u0, u1] = harmonic_traces(harmonic_oracle(c.oracle.empty() ? "linear-z" : c.oracle), s);
        if (c.op == "laplace-residual") {
          err = laplace_residual(sys, u0, u1, 1.0).sup_norm;
        } else if (c.op == "neumann-completion") {
          const Vector r = solve_u0_from_u1(sys, u1, c.eq3_tol).u0.values;
          const double shift = (surface_integral(s, u0.values) - surface_integral(s, r)) / s.area();
          err = sup_norm(r.array() + shift - u0.values.array());
        } else {
          err = sup_norm(solve_u1_from_u0(sys, u0, c.regularization).values - u1.values);
        }
      }
    } else {
      JobConfig hc = base;
      try {
        hc.nt = std::stoi(g);
      } catch (const std::exception&) {
        throw InvalidArgument("heat grids are t-point counts, got '" + g + "'");
      }
      size = static_cast<std::size_t>(hc.nt);
      const double h = hc.tmax / hc.nt;
      if (c.op == "abel-roundtrip") {
        CaloricTraces tr;
        tr.x_grid = uniform_grid(1.0, 8);
        tr.v = Vector::Zero(8);
        tr.t_grid = uniform_grid(hc.tmax, hc.nt);
        tr.psi = Vector(tr.t_grid.unaryExpr([](double t) { return std::cos(3.0 * t); }));
        tr.phi = phi_from_v_psi(tr, hc.quadrature);
        const Vector back = psi_from_v_phi(tr, hc.quadrature);
        for (Eigen::Index k = 0; k < back.size(); ++k)
          if (tr.t_grid[k] >= 4.0 * h - 1e-12) err = std::max(err, std::abs(back[k] - (*tr.psi)[k]));
      } else {
        if (hc.oracle.empty()) hc.oracle = "erf-similarity";
        const CaloricOracle o = caloric_oracle(hc.oracle);
        const bool phi_op = c.op == "heat-phi";
        CaloricTraces tr = heat_inputs(hc, !phi_op, phi_op);
        const Vector got = phi_op ? phi_from_v_psi(tr, hc.quadrature) : psi_from_v_phi(tr, hc.quadrature);
        const double t_lo = phi_op ? 0.1 * hc.tmax : 4.0 * h;
        for (Eigen::Index k = 0; k < got.size(); ++k) {
          const double t = tr.t_grid[k];
          if (t >= t_lo - 1e-12) err = std::max(err, std::abs(got[k] - (phi_op ? o.phi(t) : o.psi(t))));
        }
      }
    }
    csv << g << ',' << size << ',' << format_double(err) << ',';
    json row = {{"grid", g}, {"size", size}, {"error", err}};
    if (gi > 0 && err > 0.0) {
      csv << format_double(prev / err);
      row["ratio"] = prev / err;
    }
    csv << '\n';
    rows.push_back(row);
    prev = err;
  }
  const auto dir = output_dir(c);
  write_text(dir / "convergence.csv", csv.str());
  return finish(dir, {{"command", c.command}, {"op", c.op}, {"rows", rows}}, out);
}

}  // namespace detail

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "check-laplace", "check-poisson", "solve-laplace", "reconstruct", "check-heat",
      "solve-heat",    "reconstruct-heat", "convergence"};
  return names;
}

/// Runs one job. Report JSON goes to `out` and the output directory; errors
/// are reported as one JSON object on `err`. Returns the process exit code.
inline int dispatch(const JobConfig& c, std::ostream& out, std::ostream& err) {
  auto fail = [&](int code, const std::string& kind, const std::string& msg, json detail) {
    json e = {{"error", kind}, {"message", msg}};
    if (!detail.is_null()) e["detail"] = std::move(detail);
    err << e.dump() << "\n";
    return code;
  };
  try {
    if (c.command == "check-laplace") return detail::check_laplace(c, out);
    if (c.command == "check-poisson") return detail::check_poisson(c, out);
    if (c.command == "solve-laplace") return detail::solve_laplace(c, out);
    if (c.command == "reconstruct") return detail::reconstruct(c, out);
    if (c.command == "check-heat") return detail::check_heat(c, out);
    if (c.command == "solve-heat") return detail::solve_heat(c, out);
    if (c.command == "reconstruct-heat") return detail::reconstruct_heat(c, out);
    if (c.command == "convergence") return detail::convergence(c, out);
    return fail(invalid_input, "invalid-argument", "unknown command '" + c.command + "'", {});
  } catch (const detail::Inconsistent& inc) {
    err << inc.payload.dump() << "\n";
    return inconsistent;
  } catch (const Error& e) {
    json d = e.detail().empty() ? json() : json::parse(e.detail(), nullptr, false);
    switch (e.kind()) {
      case ErrorKind::incompatible_data: return fail(inconsistent, to_string(e.kind()), e.what(), d);
      case ErrorKind::invalid_argument:
      case ErrorKind::unsupported: return fail(invalid_input, to_string(e.kind()), e.what(), d);
      case ErrorKind::numeric_failure:
      case ErrorKind::near_singular: return fail(numeric_failure, to_string(e.kind()), e.what(), d);
    }
    return fail(numeric_failure, "error", e.what(), d);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(invalid_input, "invalid-argument", e.what(), {});
  }
}

}  // namespace ubve::cli
