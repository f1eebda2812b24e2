// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maxtomo/inverse.hpp"
#include "maxtomo/phantom.hpp"

namespace py = pybind11;
using namespace maxtomo;

namespace {

struct PySolver {
  Mesh mesh;
  ForwardContext ctx;

  PySolver(Mesh m, const PhysicsParams& params, const SolverOptions& opts)
      : mesh(std::move(m)) {
    ctx = ForwardContext::build(mesh, params, opts);
  }

  py::dict forward(const MaterialField& material) {
    const auto res = forward_solve(ctx, material);
    py::dict out;
    out["s"] = res.S.s;
    out["iterations"] = res.stats.iterations;
    out["residuals"] = res.stats.residuals;
    out["setup_seconds"] = res.setup_seconds;
    out["solve_seconds"] = res.solve_seconds;
    return out;
  }

  py::dict invert(const ScatteringMatrix& s_mes,
                  const ScatteringMatrix& s_empty, const InverseConfig& cfg,
                  Complex initial) {
    InverseDriver driver(ctx, s_mes, s_empty, cfg);
    const auto res = driver.minimize(MaterialField::uniform(mesh, initial));
    const MaterialField rec = driver.unpack(res.x);
    py::dict out;
    py::array_t<Complex> eps(static_cast<py::ssize_t>(rec.eps_r.size()));
    std::copy(rec.eps_r.begin(), rec.eps_r.end(),
              eps.mutable_data());
    out["eps_r"] = eps;
    out["cost"] = res.cost;
    out["iterations"] = res.iterations;
    std::vector<std::tuple<int, Real, Real, Real>> hist;
    for (const auto& h : res.history)
      hist.emplace_back(h.iter, h.cost, h.grad_norm, h.step);
    out["history"] = hist;
    out["line_search_failed"] =
        res.status == LbfgsStatus::LineSearchFailure;
    return out;
  }
};

py::array_t<double> mesh_nodes(const Mesh& m) {
  py::array_t<double> out({m.n_nodes(), 3});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < m.n_nodes(); ++i)
    for (int k = 0; k < 3; ++k) r(i, k) = m.nodes[i][k];
  return out;
}

py::array_t<int> mesh_tets(const Mesh& m) {
  py::array_t<int> out({m.n_tets(), 4});
  auto r = out.mutable_unchecked<2>();
  for (int t = 0; t < m.n_tets(); ++t)
    for (int k = 0; k < 4; ++k) r(t, k) = m.tets[t].nodes[k];
  return out;
}

}  // namespace

PYBIND11_MODULE(_maxtomo, m) {
  m.doc() = "Edge-element microwave tomography: forward S-parameter "
            "simulation and adjoint-state permittivity reconstruction";

  py::class_<ChamberSpec>(m, "ChamberSpec")
      .def(py::init<>())
      .def_readwrite("radius", &ChamberSpec::radius)
      .def_readwrite("height", &ChamberSpec::height)
      .def_readwrite("n_rings", &ChamberSpec::n_rings)
      .def_readwrite("antennas_per_ring", &ChamberSpec::antennas_per_ring)
      .def_readwrite("port_width", &ChamberSpec::port_width)
      .def_readwrite("port_height", &ChamberSpec::port_height)
      .def_readwrite("h", &ChamberSpec::h);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_nodes", &Mesh::n_nodes)
      .def_property_readonly("n_tets", &Mesh::n_tets)
      .def_property_readonly("n_ports", &Mesh::n_ports)
      .def_property_readonly("nodes", &mesh_nodes)
      .def_property_readonly("tets", &mesh_tets);

  m.def("generate_chamber_mesh", &generate_chamber_mesh, py::arg("spec"));
  m.def("load_mesh", &load_mesh, py::arg("path"));
  m.def("save_mesh", &save_mesh, py::arg("mesh"), py::arg("path"));

  py::class_<PhysicsParams>(m, "PhysicsParams")
      .def(py::init<>())
      .def_readwrite("frequency", &PhysicsParams::frequency)
      .def_readwrite("eps_r_ceramic", &PhysicsParams::eps_r_ceramic)
      .def_readwrite("port_width", &PhysicsParams::port_width)
      .def_readwrite("port_height", &PhysicsParams::port_height)
      .def_readwrite("amplitude", &PhysicsParams::amplitude)
      .def_property_readonly("beta", &PhysicsParams::beta)
      .def_property_readonly("cutoff_frequency",
                             &PhysicsParams::cutoff_frequency);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("n_subdomains", &SolverOptions::n_subdomains)
      .def_readwrite("overlap", &SolverOptions::overlap)
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("restart", &SolverOptions::restart)
      .def_readwrite("threads", &SolverOptions::threads)
      .def_readwrite("rhs_per_group", &SolverOptions::rhs_per_group)
      .def_readwrite("solver_groups", &SolverOptions::solver_groups);

  py::class_<MaterialField>(m, "MaterialField")
      .def_static("uniform", &MaterialField::uniform, py::arg("mesh"),
                  py::arg("value"))
      .def_readwrite("eps_r", &MaterialField::eps_r);

  py::class_<Ellipsoid>(m, "Ellipsoid")
      .def(py::init<>())
      .def_readwrite("center", &Ellipsoid::center)
      .def_readwrite("semi_axes", &Ellipsoid::semi_axes)
      .def_readwrite("euler", &Ellipsoid::euler);

  py::enum_<StrokeRule>(m, "StrokeRule")
      .value("Absolute", StrokeRule::Absolute)
      .value("MeanWithBlood", StrokeRule::MeanWithBlood);

  py::class_<PhantomSpec>(m, "PhantomSpec")
      .def(py::init<>())
      .def_readwrite("background", &PhantomSpec::background)
      .def_readwrite("stroke", &PhantomSpec::stroke)
      .def_readwrite("rule", &PhantomSpec::rule)
      .def_readwrite("stroke_value", &PhantomSpec::stroke_value)
      .def_readwrite("blood", &PhantomSpec::blood);

  m.def("build_phantom", &build_phantom, py::arg("spec"), py::arg("mesh"));

  py::enum_<Provenance>(m, "Provenance")
      .value("Simulated", Provenance::Simulated)
      .value("SyntheticNoisy", Provenance::SyntheticNoisy)
      .value("EmptyReference", Provenance::EmptyReference);

  py::class_<ScatteringMatrix>(m, "ScatteringMatrix")
      .def_readonly("n", &ScatteringMatrix::n)
      .def_readonly("s", &ScatteringMatrix::s)
      .def_readonly("provenance", &ScatteringMatrix::provenance)
      .def_readonly("frequency", &ScatteringMatrix::frequency)
      .def("valid", &ScatteringMatrix::valid)
      .def("at", &ScatteringMatrix::at);

  m.def("add_noise", &add_noise, py::arg("s"), py::arg("level"),
        py::arg("seed"));
  m.def("save_smatrix", &save_smatrix, py::arg("s"), py::arg("path"));
  m.def("load_smatrix", &load_smatrix, py::arg("path"));
  m.def("magnitude_db",
        [](Complex s) { return magnitude_db(s, nullptr); });

  py::class_<InverseConfig>(m, "InverseConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &InverseConfig::alpha)
      .def_readwrite("normalize", &InverseConfig::normalize)
      .def_readwrite("memory", &InverseConfig::memory)
      .def_readwrite("max_iterations", &InverseConfig::max_iterations)
      .def_readwrite("cost_threshold", &InverseConfig::cost_threshold)
      .def_readwrite("threshold_relative", &InverseConfig::threshold_relative)
      .def_readwrite("transmitters", &InverseConfig::transmitters);

  py::class_<PySolver>(m, "Solver")
      .def(py::init<Mesh, const PhysicsParams&, const SolverOptions&>(),
           py::arg("mesh"), py::arg("physics"), py::arg("options"))
      .def_property_readonly(
          "n_dofs", [](const PySolver& s) { return s.ctx.numbering.n(); })
      .def_property_readonly(
          "n_ports", [](const PySolver& s) { return s.ctx.n_ports(); })
      .def("forward", &PySolver::forward, py::arg("material"))
      .def("invert", &PySolver::invert, py::arg("s_mes"), py::arg("s_empty"),
           py::arg("config"), py::arg("initial"));
}
