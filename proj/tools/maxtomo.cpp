// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// maxtomo: microwave-tomography pipeline driver.
//   meshgen   generate a chamber mesh
//   forward   solve all transmitters and write the S matrix
//   synth     synthesize noisy measurement data from a phantom
//   invert    reconstruct eps_r from S-parameter data
//   bench     subdomain/thread scaling report
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 optimization (line search) failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxtomo/forward.hpp"
#include "maxtomo/inverse.hpp"
#include "maxtomo/parallel.hpp"
#include "maxtomo/phantom.hpp"

namespace mt = maxtomo;
using nlohmann::json;

namespace {

struct RunConfig {
  // [mesh]
  std::string mesh_file;
  mt::ChamberSpec chamber;
  // [physics]
  double frequency = 1e9;
  std::vector<double> eps_cer{59.0, 0.0};
  double amplitude = 1.0;
  double phys_port_width = 0;   // 0 = infer from the mesh/chamber
  double phys_port_height = 0;
  // [material]
  std::string material_mode = "uniform";  // uniform | phantom | csv
  std::vector<double> material_uniform{44.0, -20.0};
  std::string material_csv;
  // [phantom]
  std::vector<double> background{44.0, -20.0};
  std::vector<double> stroke_center;
  std::vector<double> stroke_axes;
  std::vector<double> stroke_euler{0, 0, 0};
  std::string stroke_rule = "mean-with-blood";  // or "absolute"
  std::vector<double> stroke_value{0, 0};
  std::vector<double> blood{68.0, -44.0};
  std::vector<double> head_center;
  std::vector<double> head_axes;
  std::vector<double> head_eps{0, 0};
  double noise_level = 0.1;
  // [solver]
  mt::SolverOptions solver;
  std::string variant = "oras";
  std::string strategy = "rcb";
  // [inverse]
  mt::InverseConfig inverse;
  std::string threshold_mode = "relative";
  std::vector<int> rings;
  // [output]
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  mt::PhysicsParams physics(const mt::Mesh& mesh) const {
    mt::PhysicsParams p;
    p.frequency = frequency;
    p.eps_r_ceramic = mt::Complex(eps_cer[0], eps_cer[1]);
    p.amplitude = amplitude;
    if (phys_port_width > 0) {
      p.port_width = phys_port_width;
      p.port_height = phys_port_height > 0 ? phys_port_height : phys_port_width;
    } else if (mesh_file.empty()) {
      p.port_width = chamber.port_width;
      p.port_height = chamber.port_height;
    } else {
      const auto g = mt::port_geometry(mesh, 1);
      p.port_width = g.a;
      p.port_height = g.b;
    }
    return p;
  }
};

// The config file is INI with sections [mesh] [physics] [solver] [inverse]
// [output], `key = value` lines and `#` comments. Each pair becomes a
// `--section.key=value` token injected before the explicit flags, so any
// key is overridable on the command line.
std::vector<std::string> ini_to_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) mt::fail_config("cannot open config file '" + path + "'");
  std::vector<std::string> args;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        mt::fail_config(path + ":" + std::to_string(lineno) +
                        ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      mt::fail_config(path + ":" + std::to_string(lineno) +
                      ": expected `key = value` inside a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    args.push_back("--" + section + "." + key + "=" + value);
  }
  return args;
}

void add_options(CLI::App& app, RunConfig& cfg) {
  auto opt = [&app](const std::string& name, auto& dest,
                    const std::string& desc = "") {
    return app.add_option(name, dest, desc)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };
  std::string config_doc;
  app.add_option("--config", config_doc,
                 "INI config file (sections [mesh] [physics] [solver] "
                 "[inverse] [output]); keys override as --section.key");
  opt("--seed", cfg.seed, "RNG seed");
  auto* threads =
      opt("--threads,--solver.threads", cfg.solver.threads,
          "worker threads (env MAXTOMO_THREADS as fallback)");

  opt("--mesh.file", cfg.mesh_file,
      "MSH-lite mesh file; empty generates a chamber");
  opt("--mesh.radius", cfg.chamber.radius);
  opt("--mesh.height", cfg.chamber.height);
  opt("--mesh.n-rings", cfg.chamber.n_rings);
  opt("--mesh.antennas-per-ring", cfg.chamber.antennas_per_ring);
  opt("--mesh.port-width", cfg.chamber.port_width);
  opt("--mesh.port-height", cfg.chamber.port_height);
  opt("--mesh.h", cfg.chamber.h, "target mesh size");

  opt("--physics.frequency", cfg.frequency);
  opt("--physics.eps-cer", cfg.eps_cer)->expected(2)->delimiter(',');
  opt("--physics.amplitude", cfg.amplitude);
  opt("--physics.port-width", cfg.phys_port_width);
  opt("--physics.port-height", cfg.phys_port_height);

  opt("--material.mode", cfg.material_mode)
      ->check(CLI::IsMember({"uniform", "phantom", "csv"}));
  opt("--material.uniform", cfg.material_uniform)->expected(2)->delimiter(',');
  opt("--material.csv", cfg.material_csv);

  opt("--phantom.background", cfg.background)->expected(2)->delimiter(',');
  opt("--phantom.stroke-center", cfg.stroke_center)
      ->expected(3)
      ->delimiter(',');
  opt("--phantom.stroke-axes", cfg.stroke_axes)->expected(3)->delimiter(',');
  opt("--phantom.stroke-euler", cfg.stroke_euler)->expected(3)->delimiter(',');
  opt("--phantom.stroke-rule", cfg.stroke_rule)
      ->check(CLI::IsMember({"mean-with-blood", "absolute"}));
  opt("--phantom.stroke-value", cfg.stroke_value)->expected(2)->delimiter(',');
  opt("--phantom.blood", cfg.blood)->expected(2)->delimiter(',');
  opt("--phantom.head-center", cfg.head_center)->expected(3)->delimiter(',');
  opt("--phantom.head-axes", cfg.head_axes)->expected(3)->delimiter(',');
  opt("--phantom.head-eps", cfg.head_eps)->expected(2)->delimiter(',');
  opt("--phantom.noise", cfg.noise_level);

  opt("--solver.subdomains", cfg.solver.n_subdomains);
  opt("--solver.overlap", cfg.solver.overlap);
  opt("--solver.variant", cfg.variant)
      ->check(CLI::IsMember({"oras", "ras"}));
  opt("--solver.strategy", cfg.strategy)
      ->check(CLI::IsMember({"rcb", "greedy"}));
  opt("--solver.tol", cfg.solver.tol);
  opt("--solver.max-iter", cfg.solver.max_iter);
  opt("--solver.restart", cfg.solver.restart);
  opt("--solver.rhs-per-group", cfg.solver.rhs_per_group);
  opt("--solver.solver-groups", cfg.solver.solver_groups);
  opt("--solver.port-quad-refine", cfg.solver.port_quad_refine);

  opt("--inverse.alpha", cfg.inverse.alpha);
  app.add_flag("--inverse.normalize,!--inverse.no-normalize",
               cfg.inverse.normalize);
  opt("--inverse.memory", cfg.inverse.memory);
  opt("--inverse.max-iter", cfg.inverse.max_iterations);
  opt("--inverse.threshold", cfg.inverse.cost_threshold);
  opt("--inverse.threshold-mode", cfg.threshold_mode)
      ->check(CLI::IsMember({"relative", "absolute"}));
  app.add_option("--inverse.rings", cfg.rings,
                 "ring indices for layer-by-layer reconstruction")
      ->delimiter(',');

  opt("--output.dir", cfg.out_dir);

  app.parse_complete_callback([&cfg, threads]() {
    if (threads->count() == 0) {
      if (const char* env = std::getenv("MAXTOMO_THREADS"))
        cfg.solver.threads = std::max(1, std::atoi(env));
    }
    if (cfg.solver.threads < 1)
      throw CLI::ValidationError("--threads", "threads must be >= 1");
    if (!(cfg.solver.tol > 0) || cfg.solver.tol >= 1)
      throw CLI::ValidationError("--solver.tol", "tol must be in (0, 1)");
    cfg.solver.variant = cfg.variant == "ras" ? mt::SchwarzVariant::RAS
                                              : mt::SchwarzVariant::ORAS;
    cfg.solver.strategy = cfg.strategy == "greedy"
                              ? mt::PartitionStrategy::GreedyGraph
                              : mt::PartitionStrategy::CoordinateBisection;
    cfg.inverse.threshold_relative = cfg.threshold_mode == "relative";
  });
}

mt::Mesh obtain_mesh(const RunConfig& cfg) {
  if (!cfg.mesh_file.empty()) {
    if (!std::filesystem::exists(cfg.mesh_file))
      mt::fail_config("mesh file '" + cfg.mesh_file + "' does not exist");
    return mt::load_mesh(cfg.mesh_file);
  }
  return mt::generate_chamber_mesh(cfg.chamber);
}

mt::PhantomSpec phantom_spec(const RunConfig& cfg);

mt::MaterialField obtain_material(const RunConfig& cfg, const mt::Mesh& mesh) {
  if (cfg.material_mode == "uniform")
    return mt::MaterialField::uniform(
        mesh, mt::Complex(cfg.material_uniform[0], cfg.material_uniform[1]));
  if (cfg.material_mode == "csv") {
    if (cfg.material_csv.empty() ||
        !std::filesystem::exists(cfg.material_csv))
      mt::fail_config("material.csv file not found: '" + cfg.material_csv +
                      "'");
    return mt::load_material_csv(mesh, cfg.material_csv);
  }
  return mt::build_phantom(phantom_spec(cfg), mesh);
}

mt::PhantomSpec phantom_spec(const RunConfig& cfg) {
  mt::PhantomSpec spec;
  spec.background = mt::Complex(cfg.background[0], cfg.background[1]);
  spec.blood = mt::Complex(cfg.blood[0], cfg.blood[1]);
  if (!cfg.head_center.empty()) {
    mt::Ellipsoid e;
    e.center = mt::Vec3(cfg.head_center[0], cfg.head_center[1],
                        cfg.head_center[2]);
    e.semi_axes = mt::Vec3(cfg.head_axes[0], cfg.head_axes[1],
                           cfg.head_axes[2]);
    spec.head = e;
    spec.head_eps = mt::Complex(cfg.head_eps[0], cfg.head_eps[1]);
  }
  if (!cfg.stroke_center.empty()) {
    mt::Ellipsoid e;
    e.center = mt::Vec3(cfg.stroke_center[0], cfg.stroke_center[1],
                        cfg.stroke_center[2]);
    e.semi_axes = mt::Vec3(cfg.stroke_axes[0], cfg.stroke_axes[1],
                           cfg.stroke_axes[2]);
    e.euler = mt::Vec3(cfg.stroke_euler[0], cfg.stroke_euler[1],
                       cfg.stroke_euler[2]);
    spec.stroke = e;
    spec.rule = cfg.stroke_rule == "absolute" ? mt::StrokeRule::Absolute
                                              : mt::StrokeRule::MeanWithBlood;
    spec.stroke_value = mt::Complex(cfg.stroke_value[0], cfg.stroke_value[1]);
  }
  return spec;
}

void log_solve(std::ofstream& log, const std::vector<int>& tx,
               const mt::ForwardResult& res) {
  for (size_t c = 0; c < tx.size(); ++c) {
    json j;
    j["event"] = "solve";
    j["transmitter"] = tx[c];
    j["iterations"] = res.stats.iterations[c];
    j["residual"] = res.stats.residuals[c];
    log << j.dump() << "\n";
  }
  json j;
  j["event"] = "forward";
  j["setup_s"] = res.setup_seconds;
  j["solve_s"] = res.solve_seconds;
  log << j.dump() << "\n";
}

std::vector<mt::Real> nodal_component(const mt::MaterialField& m, bool re) {
  std::vector<mt::Real> out(m.eps_r.size());
  for (size_t i = 0; i < m.eps_r.size(); ++i)
    out[i] = re ? m.eps_r[i].real() : m.eps_r[i].imag();
  return out;
}

void write_eps_vtk(const mt::Mesh& mesh, const mt::MaterialField& m,
                   const std::string& path) {
  mt::write_vtk(mesh,
                {{"eps_re", nodal_component(m, true)},
                 {"eps_im", nodal_component(m, false)}},
                path);
}

void write_history_csv(const mt::LbfgsResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) mt::fail_config("cannot open '" + path + "' for writing");
  out << "iter,cost,grad_norm,step\n";
  char buf[128];
  for (const auto& h : r.history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", h.iter, h.cost,
                  h.grad_norm, h.step);
    out << buf;
  }
}

int cmd_meshgen(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto mesh = mt::generate_chamber_mesh(cfg.chamber);
  mt::save_mesh(mesh, cfg.out_dir + "/mesh.msh");
  std::cout << "wrote " << cfg.out_dir << "/mesh.msh: " << mesh.n_nodes()
            << " nodes, " << mesh.n_tets() << " tets, " << mesh.n_ports()
            << " ports\n";
  return 0;
}

int cmd_forward(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto mesh = obtain_mesh(cfg);
  const auto material = obtain_material(cfg, mesh);
  auto ctx = mt::ForwardContext::build(mesh, cfg.physics(mesh), cfg.solver);
  const auto res = mt::forward_solve(ctx, material);
  mt::save_smatrix(res.S, cfg.out_dir + "/smatrix.csv");
  std::ofstream log(cfg.out_dir + "/log.jsonl");
  log_solve(log, ctx.all_transmitters(), res);
  std::cout << "wrote " << cfg.out_dir << "/smatrix.csv (" << ctx.n_ports()
            << " ports, " << ctx.numbering.n() << " DoFs, max "
            << res.stats.max_iterations() << " iterations)\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto mesh = obtain_mesh(cfg);
  const auto truth = mt::build_phantom(phantom_spec(cfg), mesh);
  auto ctx = mt::ForwardContext::build(mesh, cfg.physics(mesh), cfg.solver);

  std::ofstream log(cfg.out_dir + "/log.jsonl");
  const auto res = mt::forward_solve(ctx, truth);
  log_solve(log, ctx.all_transmitters(), res);
  const auto noisy = mt::add_noise(res.S, cfg.noise_level, cfg.seed);
  mt::save_smatrix(noisy, cfg.out_dir + "/smes.csv");

  const mt::Complex gel(cfg.background[0], cfg.background[1]);
  const auto sempty = mt::empty_reference(ctx, gel, cfg.out_dir);
  mt::save_smatrix(sempty, cfg.out_dir + "/sempty.csv");
  write_eps_vtk(mesh, truth, cfg.out_dir + "/truth.vtk");
  std::cout << "wrote " << cfg.out_dir << "/smes.csv, sempty.csv, truth.vtk\n";
  return 0;
}

int cmd_invert(const RunConfig& cfg, const std::string& smes_path,
               const std::string& sempty_path) {
  std::filesystem::create_directories(cfg.out_dir);
  if (smes_path.empty() || !std::filesystem::exists(smes_path))
    mt::fail_config("measured S matrix '" + smes_path + "' not found");
  if (cfg.inverse.normalize &&
      (sempty_path.empty() || !std::filesystem::exists(sempty_path)))
    mt::fail_config("empty-chamber S matrix required for normalization; "
                    "pass --sempty or --inverse.no-normalize");

  const auto mesh = obtain_mesh(cfg);
  auto s_mes = mt::load_smatrix(smes_path);
  mt::ScatteringMatrix s_empty;
  if (!sempty_path.empty() && std::filesystem::exists(sempty_path))
    s_empty = mt::load_smatrix(sempty_path);

  const mt::Complex init(cfg.material_uniform[0], cfg.material_uniform[1]);
  const auto physics = cfg.physics(mesh);
  bool line_search_failed = false;

  if (cfg.rings.empty()) {
    auto ctx = mt::ForwardContext::build(mesh, physics, cfg.solver);
    mt::InverseDriver driver(ctx, s_mes, s_empty, cfg.inverse);
    auto result = driver.minimize(mt::MaterialField::uniform(mesh, init));
    write_eps_vtk(mesh, driver.unpack(result.x), cfg.out_dir + "/eps.vtk");
    write_history_csv(result, cfg.out_dir + "/history.csv");
    line_search_failed = result.status == mt::LbfgsStatus::LineSearchFailure;
    std::cout << "final cost " << result.cost << " after "
              << result.iterations << " iterations\n";
  } else {
    const mt::RingLayout layout{cfg.chamber.n_rings,
                                cfg.chamber.antennas_per_ring};
    mt::Real zmin = 1e300, zmax = -1e300;
    for (const auto& p : mesh.nodes) {
      zmin = std::min(zmin, p.z());
      zmax = std::max(zmax, p.z());
    }
    for (int ring : cfg.rings) {
      const auto trunc =
          mt::truncate_for_ring(mesh, layout, zmax - zmin, ring);
      auto ctx = mt::ForwardContext::build(trunc.mesh, physics, cfg.solver);
      mt::InverseConfig icfg = cfg.inverse;
      icfg.transmitters = trunc.transmitters;
      mt::InverseDriver driver(ctx, mt::remap_smatrix(s_mes, trunc.port_orig),
                               mt::remap_smatrix(s_empty, trunc.port_orig),
                               icfg);
      auto result =
          driver.minimize(mt::MaterialField::uniform(trunc.mesh, init));
      const std::string suffix = "_ring" + std::to_string(ring);
      write_eps_vtk(trunc.mesh, driver.unpack(result.x),
                    cfg.out_dir + "/eps" + suffix + ".vtk");
      write_history_csv(result, cfg.out_dir + "/history" + suffix + ".csv");
      line_search_failed |=
          result.status == mt::LbfgsStatus::LineSearchFailure;
      std::cout << "ring " << ring << ": final cost " << result.cost
                << " after " << result.iterations << " iterations\n";
    }
  }
  return line_search_failed ? 4 : 0;
}

int cmd_bench(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto mesh = obtain_mesh(cfg);
  const auto material = obtain_material(cfg, mesh);
  const auto physics = cfg.physics(mesh);

  std::ofstream out(cfg.out_dir + "/bench.csv");
  out << "n_subdomains,threads,setup_s,solve_s,iterations\n";
  std::vector<int> thread_counts;
  for (int t = 1; t <= std::max(mt::hardware_threads(), 8); t *= 2)
    thread_counts.push_back(t);
  char buf[160];
  for (int ns : {1, 2, 4, 8}) {
    if (ns > mesh.n_tets()) continue;
    for (int threads : thread_counts) {
      mt::SolverOptions opts = cfg.solver;
      opts.n_subdomains = ns;
      opts.threads = threads;
      auto ctx = mt::ForwardContext::build(mesh, physics, opts);
      const auto res = mt::forward_solve(ctx, material);
      std::snprintf(buf, sizeof(buf), "%d,%d,%.6g,%.6g,%d\n", ns, threads,
                    res.setup_seconds, res.solve_seconds,
                    res.stats.max_iterations());
      out << buf;
      out.flush();
      std::cout << buf;
    }
  }
  std::cout << "wrote " << cfg.out_dir << "/bench.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maxtomo: edge-element microwave tomography"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* meshgen = app.add_subcommand("meshgen", "generate a chamber mesh");
  auto* forward = app.add_subcommand("forward", "forward S-parameter solve");
  auto* synth = app.add_subcommand("synth", "synthesize noisy data");
  auto* invert = app.add_subcommand("invert", "reconstruct permittivity");
  auto* bench = app.add_subcommand("bench", "scaling report");
  std::string smes_path, sempty_path;
  invert->add_option("--smes", smes_path, "measured S-matrix CSV");
  invert->add_option("--sempty", sempty_path, "empty-chamber S-matrix CSV");
  for (CLI::App* sub : {meshgen, forward, synth, invert, bench})
    add_options(*sub, cfg);

  // Expand `--config FILE` into `--section.key=value` tokens placed right
  // after the subcommand, so explicit flags (parsed last) win.
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    std::string config_path;
    for (size_t i = 2; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size())
        config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        config_path = args[i].substr(9);
    }
    if (!config_path.empty() && args.size() >= 2) {
      const auto injected = ini_to_args(config_path);
      args.insert(args.begin() + 2, injected.begin(), injected.end());
    }
  } catch (const mt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::vector<const char*> cargs;
    cargs.reserve(args.size());
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (meshgen->parsed()) return cmd_meshgen(cfg);
    if (forward->parsed()) return cmd_forward(cfg);
    if (synth->parsed()) return cmd_synth(cfg);
    if (invert->parsed()) return cmd_invert(cfg, smes_path, sempty_path);
    if (bench->parsed()) return cmd_bench(cfg);
  } catch (const mt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case mt::ErrorKind::Config:
        return 2;
      case mt::ErrorKind::Solver:
        return 3;
      case mt::ErrorKind::Optimization:
        return 4;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
