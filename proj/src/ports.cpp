// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/ports.hpp"

#include <cmath>

namespace maxtomo {

Vec3 PortMode::e0(const Vec3& x) const {
  const Real xi = (x - geom.origin).dot(geom.xi_axis);
  return amplitude * std::sin(pi * xi / geom.a) * geom.eta_axis;
}

namespace {

std::array<Real, 4> face_bary(const BoundaryFace& f,
                              const std::array<Real, 3>& tri_bary) {
  std::array<Real, 4> b{0, 0, 0, 0};
  for (int k = 0; k < 3; ++k) b[f.corner[k]] = tri_bary[k];
  return b;
}

}  // namespace

PortMode te10_mode(const Mesh& mesh, const DofNumbering& numbering,
                   const PortGeometry& geom, const PhysicsParams& params,
                   int quad_refine_levels) {
  PortMode m;
  m.geom = geom;
  m.amplitude = params.amplitude;
  m.beta = params.beta();
  m.overlap = VecXc::Zero(numbering.n());

  const TriQuad quad =
      refined_tri_quadrature(default_tri_quadrature(), quad_refine_levels);
  for (const auto& f : boundary_faces(mesh)) {
    if (f.tag != geom.tag) continue;
    const TetFrame fr = tet_frame(mesh, f.tet);
    const auto& de = numbering.edges.tet_edge[f.tet];
    for (const auto& qp : quad) {
      const auto bary = face_bary(f, qp.bary);
      const Vec3 x = fr.point(bary);
      const Vec3 e0 = m.e0(x);
      m.norm += f.area * qp.weight * e0.squaredNorm();
      for (int a = 0; a < 3; ++a) {
        const int ra = numbering.full_to_reduced[de[f.local_edge[a]]];
        if (ra < 0) continue;
        const Vec3 w = numbering.edges.tet_sign[f.tet][f.local_edge[a]] *
                       edge_basis(fr, f.local_edge[a], bary);
        m.overlap[ra] += f.area * qp.weight * e0.dot(w);
      }
    }
  }
  if (m.norm <= 0)
    fail_config("port " + std::to_string(geom.tag) +
                " mode has zero norm (no tagged faces?)");
  return m;
}

std::vector<PortMode> build_port_modes(const Mesh& mesh,
                                       const DofNumbering& numbering,
                                       const PhysicsParams& params,
                                       int quad_refine_levels) {
  const int np = mesh.n_ports();
  std::vector<PortMode> ports;
  ports.reserve(np);
  for (int p = 1; p <= np; ++p)
    ports.push_back(te10_mode(mesh, numbering, port_geometry(mesh, p), params,
                              quad_refine_levels));
  return ports;
}

MatXc assemble_port_rhs_block(const std::vector<PortMode>& ports, int n) {
  MatXc B(n, static_cast<int>(ports.size()));
  for (size_t j = 0; j < ports.size(); ++j)
    B.col(static_cast<int>(j)) =
        Complex(0, 1) * ports[j].beta * ports[j].overlap;
  return B;
}

Complex port_overlap_analytic(const Mesh& mesh, const PortMode& port,
                              const VectorField& field,
                              int quad_refine_levels) {
  const TriQuad quad =
      refined_tri_quadrature(default_tri_quadrature(), quad_refine_levels);
  Complex acc(0, 0);
  for (const auto& f : boundary_faces(mesh)) {
    if (f.tag != port.geom.tag) continue;
    const TetFrame fr = tet_frame(mesh, f.tet);
    for (const auto& qp : quad) {
      const Vec3 x = fr.point(face_bary(f, qp.bary));
      const Vec3 e0 = port.e0(x);
      const Vec3c val = field(x);
      acc += f.area * qp.weight *
             (std::conj(val(0)) * e0(0) + std::conj(val(1)) * e0(1) +
              std::conj(val(2)) * e0(2));
    }
  }
  return acc;
}

}  // namespace maxtomo
