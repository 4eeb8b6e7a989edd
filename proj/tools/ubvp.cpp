#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "ubve/cli.hpp"

namespace {

std::string command_help() {
  std::string s = "command: ";
  for (const auto& c : ubve::cli::command_names()) s += c + " ";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using nlohmann::json;
  CLI::App app{"Universal boundary value equations: residual checks, trace completion, "
               "reconstruction and convergence studies"};
  app.set_help_flag("-h,--help");

  json flags = json::object();
  std::string command, config, surface, grid, oracle, u0, u1, given, points, output_dir, v, phi,
      psi, decay, v_tail, target, op, grids;
  double source = 0, tol = 0, eq3_tol = 0, poisson_sign = 1, regularization = 0, mean = 0,
         tmax = 0, xmax = 0;
  int nt = 0, nx = 0, gauss_nodes = 0, start_panels = 0;
  std::vector<int> volume_grid;
  bool allow_inconsistent = false;

  app.add_option("command", command, command_help());
  app.add_option("--config", config, "JSON job file (keys match the long flag names)");
  auto* o_surface = app.add_option("--surface", surface, "surface descriptor (.json) or mesh (.off)");
  auto* o_grid = app.add_option("--grid", grid, "analytic surface grid, e.g. 32x64");
  auto* o_oracle = app.add_option("--oracle", oracle, "closed-form solution supplying the traces");
  auto* o_u0 = app.add_option("--u0", u0, "Dirichlet trace CSV");
  auto* o_u1 = app.add_option("--u1", u1, "Neumann trace CSV");
  auto* o_source = app.add_option("--source", source, "constant Poisson source f");
  auto* o_given = app.add_option("--given", given, "solve-laplace: trace supplied (u0|u1)");
  auto* o_points = app.add_option("--points", points, "evaluation points CSV");
  auto* o_tol = app.add_option("--tol", tol, "consistency tolerance");
  auto* o_eq3 = app.add_option("--eq3-tol", eq3_tol, "relative flux tolerance for Neumann data");
  auto* o_out = app.add_option("--output-dir", output_dir, "artifact directory");
  auto* o_sign = app.add_option("--poisson-sign", poisson_sign, "volume term sign (+1 or -1)");
  auto* o_vol = app.add_option("--volume-grid", volume_grid, "ball rule sizes n_r n_theta n_phi")
                    ->expected(3);
  auto* o_allow = app.add_flag("--allow-inconsistent", allow_inconsistent,
                               "reconstruct even when the traces fail the residual check");
  auto* o_reg = app.add_option("--regularization", regularization, "Tikhonov parameter");
  auto* o_mean = app.add_option("--mean", mean, "prescribed integral of the completed u0");
  auto* o_tmax = app.add_option("--tmax", tmax, "heat: final time");
  auto* o_nt = app.add_option("--nt", nt, "heat: number of t points");
  auto* o_xmax = app.add_option("--xmax", xmax, "heat: x-grid extent");
  auto* o_nx = app.add_option("--nx", nx, "heat: number of x points");
  auto* o_v = app.add_option("--v", v, "heat: initial trace CSV (x,value)");
  auto* o_phi = app.add_option("--phi", phi, "heat: boundary trace CSV (t,value)");
  auto* o_psi = app.add_option("--psi", psi, "heat: boundary flux CSV (t,value)");
  auto* o_decay = app.add_option("--decay", decay,
                                 "heat: compactly-supported | gaussian-dominated | polynomial");
  auto* o_tail = app.add_option("--v-tail", v_tail, "heat: closed form of v beyond the grid");
  auto* o_target = app.add_option("--target", target, "solve-heat: trace to compute (phi|psi)");
  auto* o_gauss = app.add_option("--gauss-nodes", gauss_nodes, "heat: Gauss nodes (>= 8)");
  auto* o_start = app.add_option("--start-panels", start_panels, "heat: start-zone panels");
  auto* o_op = app.add_option("--op", op, "convergence: quantity to study");
  auto* o_grids = app.add_option("--grids", grids, "convergence: comma-separated grids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", "invalid-argument"}, {"message", e.what()}}.dump() << "\n";
    return ubve::cli::invalid_input;
  }

  json job = json::object();
  if (!config.empty()) {
    std::ifstream in(config);
    try {
      if (!in) throw std::runtime_error("cannot open '" + config + "'");
      in >> job;
    } catch (const std::exception& e) {
      std::cerr << json{{"error", "invalid-argument"}, {"message", std::string("config: ") + e.what()}}
                       .dump()
                << "\n";
      return ubve::cli::invalid_input;
    }
  }
  auto set = [&](const char* key, CLI::Option* opt, const json& value) {
    if (opt->count()) job[key] = value;
  };
  if (!command.empty()) job["command"] = command;
  set("surface", o_surface, surface);
  set("grid", o_grid, grid);
  set("oracle", o_oracle, oracle);
  set("u0", o_u0, u0);
  set("u1", o_u1, u1);
  set("source", o_source, source);
  set("given", o_given, given);
  set("points", o_points, points);
  set("tol", o_tol, tol);
  set("eq3_tol", o_eq3, eq3_tol);
  set("output_dir", o_out, output_dir);
  set("poisson_sign", o_sign, poisson_sign);
  set("volume_grid", o_vol, volume_grid);
  set("allow_inconsistent", o_allow, allow_inconsistent);
  set("regularization", o_reg, regularization);
  set("mean", o_mean, mean);
  set("tmax", o_tmax, tmax);
  set("nt", o_nt, nt);
  set("xmax", o_xmax, xmax);
  set("nx", o_nx, nx);
  set("v", o_v, v);
  set("phi", o_phi, phi);
  set("psi", o_psi, psi);
  set("decay", o_decay, decay);
  set("v_tail", o_tail, v_tail);
  set("target", o_target, target);
  set("gauss_nodes", o_gauss, gauss_nodes);
  set("start_panels", o_start, start_panels);
  set("op", o_op, op);
  set("grids", o_grids, grids);

  ubve::cli::JobConfig cfg;
  try {
    if (!job.contains("command")) throw ubve::InvalidArgument("no command given");
    cfg = ubve::cli::JobConfig::from_json(job);
  } catch (const ubve::Error& e) {
    std::cerr << json{{"error", "invalid-argument"}, {"message", e.what()}}.dump() << "\n";
    return ubve::cli::invalid_input;
  }
  return ubve::cli::dispatch(cfg, std::cout, std::cerr);
}
