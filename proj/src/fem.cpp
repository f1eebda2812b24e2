// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "maxtomo/counters.hpp"
#include "maxtomo/parallel.hpp"

namespace maxtomo {

TetFrame tet_frame(const Mesh& mesh, int t) {
  TetFrame f;
  const auto& n = mesh.tets[t].nodes;
  for (int k = 0; k < 4; ++k) f.node[k] = mesh.nodes[n[k]];
  Eigen::Matrix3d J;
  J.col(0) = f.node[1] - f.node[0];
  J.col(1) = f.node[2] - f.node[0];
  J.col(2) = f.node[3] - f.node[0];
  f.volume = J.determinant() / 6.0;
  Eigen::Matrix3d Jinv = J.inverse();
  // lambda_k(x) gradients: rows of Jinv for k = 1..3, and their negative sum
  // for k = 0.
  for (int k = 1; k < 4; ++k) f.grad_lambda[k] = Jinv.row(k - 1);
  f.grad_lambda[0] = -(f.grad_lambda[1] + f.grad_lambda[2] + f.grad_lambda[3]);
  return f;
}

Vec3 edge_basis(const TetFrame& f, int le, const std::array<Real, 4>& bary) {
  const int i = kTetEdges[le][0], j = kTetEdges[le][1];
  return bary[i] * f.grad_lambda[j] - bary[j] * f.grad_lambda[i];
}

Vec3 edge_basis_curl(const TetFrame& f, int le) {
  const int i = kTetEdges[le][0], j = kTetEdges[le][1];
  return 2.0 * f.grad_lambda[i].cross(f.grad_lambda[j]);
}

DofNumbering build_dof_numbering(const Mesh& mesh) {
  DofNumbering nb;
  nb.edges = build_edge_dof_map(mesh);
  std::vector<char> on_wall(nb.edges.n_dofs(), 0);
  std::map<std::pair<int, int>, int> index;
  for (int e = 0; e < nb.edges.n_dofs(); ++e) index[nb.edges.edges[e]] = e;
  for (const auto& tri : mesh.boundary_tris) {
    if (tri.tag != kTagMetal) continue;
    const int pairs[3][2] = {{tri.nodes[0], tri.nodes[1]},
                             {tri.nodes[0], tri.nodes[2]},
                             {tri.nodes[1], tri.nodes[2]}};
    for (const auto& p : pairs) {
      auto key = std::minmax(p[0], p[1]);
      auto it = index.find({key.first, key.second});
      if (it != index.end()) on_wall[it->second] = 1;
    }
  }
  nb.full_to_reduced.assign(nb.edges.n_dofs(), -1);
  for (int e = 0; e < nb.edges.n_dofs(); ++e)
    if (!on_wall[e]) {
      nb.full_to_reduced[e] = static_cast<int>(nb.reduced_to_full.size());
      nb.reduced_to_full.push_back(e);
    }
  return nb;
}

VecXc DofNumbering::expand(const VecXc& reduced) const {
  VecXc full = VecXc::Zero(n_full());
  for (int r = 0; r < n(); ++r) full[reduced_to_full[r]] = reduced[r];
  return full;
}

VecXc DofNumbering::reduce(const VecXc& full) const {
  VecXc out(n());
  for (int r = 0; r < n(); ++r) out[r] = full[reduced_to_full[r]];
  return out;
}

std::vector<BoundaryFace> boundary_faces(const Mesh& mesh) {
  // Owning tet for each boundary face, via sorted-node keys.
  std::map<std::array<int, 3>, std::pair<int, int>> owner;  // key -> (tet, opposite corner)
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& n = mesh.tets[t].nodes;
    for (int opp = 0; opp < 4; ++opp) {
      std::array<int, 3> key;
      int k = 0;
      for (int v = 0; v < 4; ++v)
        if (v != opp) key[k++] = n[v];
      std::sort(key.begin(), key.end());
      auto it = owner.find(key);
      if (it == owner.end())
        owner[key] = {t, opp};
      else
        it->second.first = -1;  // interior face
    }
  }

  std::vector<BoundaryFace> out;
  out.reserve(mesh.boundary_tris.size());
  for (int b = 0; b < static_cast<int>(mesh.boundary_tris.size()); ++b) {
    const auto& tri = mesh.boundary_tris[b];
    std::array<int, 3> key{tri.nodes[0], tri.nodes[1], tri.nodes[2]};
    std::sort(key.begin(), key.end());
    auto it = owner.find(key);
    if (it == owner.end() || it->second.first < 0)
      fail_config("boundary tri " + std::to_string(b) +
                  " is not a face of exactly one tet");
    BoundaryFace f;
    f.tri = b;
    f.tet = it->second.first;
    f.tag = tri.tag;
    const auto& n = mesh.tets[f.tet].nodes;
    const int opp = it->second.second;
    int k = 0;
    for (int v = 0; v < 4; ++v)
      if (v != opp) f.corner[k++] = v;
    // Face edges as tet-local slots: pairs within corner[].
    const int pairs[3][2] = {{f.corner[0], f.corner[1]},
                             {f.corner[0], f.corner[2]},
                             {f.corner[1], f.corner[2]}};
    for (int e = 0; e < 3; ++e) {
      int slot = -1;
      for (int le = 0; le < 6; ++le)
        if ((kTetEdges[le][0] == pairs[e][0] &&
             kTetEdges[le][1] == pairs[e][1]) ||
            (kTetEdges[le][0] == pairs[e][1] &&
             kTetEdges[le][1] == pairs[e][0]))
          slot = le;
      f.local_edge[e] = slot;
    }
    Vec3 p0 = mesh.nodes[n[f.corner[0]]], p1 = mesh.nodes[n[f.corner[1]]],
         p2 = mesh.nodes[n[f.corner[2]]];
    Vec3 cr = (p1 - p0).cross(p2 - p0);
    f.area = cr.norm() / 2.0;
    f.normal = cr.normalized();
    // Outward: away from the opposite vertex.
    if (f.normal.dot(mesh.nodes[n[opp]] - p0) > 0) f.normal = -f.normal;
    out.push_back(f);
  }
  return out;
}

namespace {

Complex kappa_at(const Mesh& mesh, int t, const std::array<Real, 4>& bary,
                 const MaterialField& material, const PhysicsParams& params) {
  if (mesh.tets[t].region == 1)
    return params.kappa_scale() * params.eps_r_ceramic;
  Complex e(0, 0);
  for (int k = 0; k < 4; ++k)
    e += bary[k] * material.eps_r[mesh.tets[t].nodes[k]];
  return params.kappa_scale() * e;
}

std::array<Real, 4> face_bary(const BoundaryFace& f,
                              const std::array<Real, 3>& tri_bary) {
  std::array<Real, 4> b{0, 0, 0, 0};
  for (int k = 0; k < 3; ++k) b[f.corner[k]] = tri_bary[k];
  return b;
}

}  // namespace

Mat6c tet_volume_matrix(const Mesh& mesh, const EdgeDofMap& dofs, int t,
                        const MaterialField& material,
                        const PhysicsParams& params) {
  const TetFrame f = tet_frame(mesh, t);
  const auto& quad = default_tet_quadrature();
  Mat6c m = Mat6c::Zero();

  std::array<Vec3, 6> curl;
  for (int a = 0; a < 6; ++a) curl[a] = edge_basis_curl(f, a);
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      m(a, b) = f.volume * curl[a].dot(curl[b]);

  for (const auto& qp : quad) {
    const Complex kap = kappa_at(mesh, t, qp.bary, material, params);
    std::array<Vec3, 6> w;
    for (int a = 0; a < 6; ++a) w[a] = edge_basis(f, a, qp.bary);
    for (int a = 0; a < 6; ++a)
      for (int b = a; b < 6; ++b)
        m(a, b) -= f.volume * qp.weight * kap * w[a].dot(w[b]);
  }
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < a; ++b) m(a, b) = m(b, a);
  // Global orientation.
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      m(a, b) *= dofs.tet_sign[t][a] * dofs.tet_sign[t][b];
  return m;
}

Eigen::Matrix3d face_impedance_raw(const Mesh& mesh, const EdgeDofMap& dofs,
                                   const BoundaryFace& face) {
  const TetFrame f = tet_frame(mesh, face.tet);
  const auto& quad = default_tri_quadrature();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& qp : quad) {
    const auto bary = face_bary(face, qp.bary);
    std::array<Vec3, 3> wt;
    for (int a = 0; a < 3; ++a) {
      Vec3 w = edge_basis(f, face.local_edge[a], bary);
      wt[a] = w - w.dot(face.normal) * face.normal;
    }
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        m(a, b) += face.area * qp.weight * wt[a].dot(wt[b]);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < a; ++b) m(a, b) = m(b, a);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      m(a, b) *= dofs.tet_sign[face.tet][face.local_edge[a]] *
                 dofs.tet_sign[face.tet][face.local_edge[b]];
  return m;
}

ElementTemplates build_element_templates(const Mesh& mesh,
                                         const EdgeDofMap& dofs,
                                         int n_threads) {
  ElementTemplates tpl;
  tpl.stiffness.resize(mesh.n_tets());
  tpl.mass.resize(mesh.n_tets());
  const auto& quad = default_tet_quadrature();
  parallel_for(mesh.n_tets(), n_threads, [&](size_t ti) {
    const int t = static_cast<int>(ti);
    const TetFrame f = tet_frame(mesh, t);
    auto& S = tpl.stiffness[ti];
    auto& M = tpl.mass[ti];
    std::array<Vec3, 6> curl;
    for (int a = 0; a < 6; ++a) curl[a] = edge_basis_curl(f, a);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) S(a, b) = f.volume * curl[a].dot(curl[b]);
    for (int k = 0; k < 4; ++k) M[k].setZero();
    for (const auto& qp : quad) {
      std::array<Vec3, 6> w;
      for (int a = 0; a < 6; ++a) w[a] = edge_basis(f, a, qp.bary);
      for (int k = 0; k < 4; ++k) {
        const Real c = f.volume * qp.weight * qp.bary[k];
        for (int a = 0; a < 6; ++a)
          for (int b = a; b < 6; ++b) M[k](a, b) += c * w[a].dot(w[b]);
      }
    }
    for (int k = 0; k < 4; ++k)
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < a; ++b) M[k](a, b) = M[k](b, a);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        const Real s = dofs.tet_sign[t][a] * dofs.tet_sign[t][b];
        S(a, b) *= s;
        for (int k = 0; k < 4; ++k) M[k](a, b) *= s;
      }
  });
  return tpl;
}

ElementMatrices compute_element_matrices(const Mesh& mesh,
                                         const DofNumbering& numbering,
                                         const MaterialField& material,
                                         const PhysicsParams& params,
                                         int n_threads,
                                         const ElementTemplates* templates) {
  material.validate(mesh);
  ElementMatrices out;
  out.tet.resize(mesh.n_tets());
  if (templates) {
    parallel_for(mesh.n_tets(), n_threads, [&](size_t t) {
      std::array<Complex, 4> kap;
      if (mesh.tets[t].region == 1) {
        kap.fill(params.kappa_scale() * params.eps_r_ceramic);
      } else {
        for (int k = 0; k < 4; ++k)
          kap[k] =
              params.kappa_scale() * material.eps_r[mesh.tets[t].nodes[k]];
      }
      Mat6c m = templates->stiffness[t].cast<Complex>();
      for (int k = 0; k < 4; ++k)
        m -= kap[k] * templates->mass[t][k].cast<Complex>();
      out.tet[t] = m;
    });
  } else {
    parallel_for(mesh.n_tets(), n_threads, [&](size_t t) {
      out.tet[t] = tet_volume_matrix(mesh, numbering.edges,
                                     static_cast<int>(t), material, params);
    });
  }
  auto faces = boundary_faces(mesh);
  for (auto& f : faces)
    if (f.tag != kTagMetal) out.faces.push_back(f);
  out.face_raw.resize(out.faces.size());
  parallel_for(out.faces.size(), n_threads, [&](size_t i) {
    out.face_raw[i] = face_impedance_raw(mesh, numbering.edges, out.faces[i]);
  });
  return out;
}

SparseC assemble_operator(const Mesh& mesh, const DofNumbering& numbering,
                          const ElementMatrices& elems,
                          const PhysicsParams& params) {
  counters().assemblies++;
  const Complex ib = Complex(0, 1) * params.beta();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(mesh.n_tets() * 36 + elems.faces.size() * 9);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& de = numbering.edges.tet_edge[t];
    for (int a = 0; a < 6; ++a) {
      const int ra = numbering.full_to_reduced[de[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 6; ++b) {
        const int rb = numbering.full_to_reduced[de[b]];
        if (rb < 0) continue;
        trips.emplace_back(ra, rb, elems.tet[t](a, b));
      }
    }
  }
  for (size_t i = 0; i < elems.faces.size(); ++i) {
    const auto& f = elems.faces[i];
    const auto& de = numbering.edges.tet_edge[f.tet];
    for (int a = 0; a < 3; ++a) {
      const int ra = numbering.full_to_reduced[de[f.local_edge[a]]];
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int rb = numbering.full_to_reduced[de[f.local_edge[b]]];
        if (rb < 0) continue;
        trips.emplace_back(ra, rb, ib * elems.face_raw[i](a, b));
      }
    }
  }
  SparseC A(numbering.n(), numbering.n());
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

SparseC assemble_operator(const Mesh& mesh, const DofNumbering& numbering,
                          const MaterialField& material,
                          const PhysicsParams& params, int n_threads) {
  const auto elems =
      compute_element_matrices(mesh, numbering, material, params, n_threads);
  return assemble_operator(mesh, numbering, elems, params);
}

VecXc assemble_volume_source(const Mesh& mesh, const DofNumbering& numbering,
                             const VectorField& J) {
  const auto& quad = default_tet_quadrature();
  VecXc b = VecXc::Zero(numbering.n());
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const TetFrame f = tet_frame(mesh, t);
    const auto& de = numbering.edges.tet_edge[t];
    for (const auto& qp : quad) {
      const Vec3c val = J(f.point(qp.bary));
      for (int a = 0; a < 6; ++a) {
        const int ra = numbering.full_to_reduced[de[a]];
        if (ra < 0) continue;
        const Vec3 w =
            numbering.edges.tet_sign[t][a] * edge_basis(f, a, qp.bary);
        b[ra] += f.volume * qp.weight *
                 (val(0) * w(0) + val(1) * w(1) + val(2) * w(2));
      }
    }
  }
  return b;
}

VecXc assemble_field_scaled_source(const Mesh& mesh,
                                   const DofNumbering& numbering,
                                   const std::vector<Complex>& dkappa,
                                   const VecXc& E) {
  const auto& quad = default_tet_quadrature();
  const VecXc full = numbering.expand(E);
  VecXc b = VecXc::Zero(numbering.n());
  for (int t = 0; t < mesh.n_tets(); ++t) {
    if (mesh.tets[t].region != 0) continue;
    const TetFrame f = tet_frame(mesh, t);
    const auto& de = numbering.edges.tet_edge[t];
    for (const auto& qp : quad) {
      Complex dk(0, 0);
      for (int k = 0; k < 4; ++k)
        dk += qp.bary[k] * dkappa[mesh.tets[t].nodes[k]];
      Vec3c Eval = Vec3c::Zero();
      std::array<Vec3, 6> w;
      for (int a = 0; a < 6; ++a) {
        w[a] = numbering.edges.tet_sign[t][a] * edge_basis(f, a, qp.bary);
        Eval += full[de[a]] * w[a].cast<Complex>();
      }
      const Vec3c src = dk * Eval;
      for (int a = 0; a < 6; ++a) {
        const int ra = numbering.full_to_reduced[de[a]];
        if (ra < 0) continue;
        b[ra] += f.volume * qp.weight *
                 (src(0) * w[a](0) + src(1) * w[a](1) + src(2) * w[a](2));
      }
    }
  }
  return b;
}

VecXc assemble_surface_data(const Mesh& mesh, const DofNumbering& numbering,
                            int tag, const VectorField& field,
                            const VectorField& curl, Complex beta) {
  const auto& quad = default_tri_quadrature();
  VecXc b = VecXc::Zero(numbering.n());
  const Complex ib = Complex(0, 1) * beta;
  for (const auto& f : boundary_faces(mesh)) {
    if (f.tag != tag) continue;
    const TetFrame fr = tet_frame(mesh, f.tet);
    const auto& de = numbering.edges.tet_edge[f.tet];
    const Vec3c n = f.normal.cast<Complex>();
    for (const auto& qp : quad) {
      const auto bary = face_bary(f, qp.bary);
      const Vec3 x = fr.point(bary);
      const Vec3c Fv = field(x);
      const Vec3c Cv = curl(x);
      // g = (curl F) x n + i beta n x (F x n)
      const Vec3c g = Cv.cross(n) + ib * n.cross(Fv.cross(n));
      for (int a = 0; a < 3; ++a) {
        const int ra = numbering.full_to_reduced[de[f.local_edge[a]]];
        if (ra < 0) continue;
        const Vec3 w = numbering.edges.tet_sign[f.tet][f.local_edge[a]] *
                       edge_basis(fr, f.local_edge[a], bary);
        b[ra] += f.area * qp.weight *
                 (g(0) * w(0) + g(1) * w(1) + g(2) * w(2));
      }
    }
  }
  return b;
}

Complex segment_circulation(const VectorField& field, const Vec3& a,
                            const Vec3& b) {
  const Real g = 1.0 / std::sqrt(3.0);
  const Vec3 mid = (a + b) / 2.0, half = (b - a) / 2.0;
  const Vec3 t = b - a;  // tangent of length |e|
  auto along = [&](const Vec3c& v) {
    return v(0) * t(0) + v(1) * t(1) + v(2) * t(2);
  };
  // (1/|e|) int_e field . t_e with |t_e| = |e|: the lengths cancel, leaving
  // the plain average of field . (b - a) over the Gauss points.
  return (along(field(mid - g * half)) + along(field(mid + g * half))) / 2.0;
}

VecXc circulations_of(const Mesh& mesh, const EdgeDofMap& dofs,
                      const VectorField& field) {
  VecXc c(dofs.n_dofs());
  for (int e = 0; e < dofs.n_dofs(); ++e)
    c[e] = segment_circulation(field, mesh.nodes[dofs.edges[e].first],
                               mesh.nodes[dofs.edges[e].second]);
  return c;
}

FieldError hcurl_error(const Mesh& mesh, const EdgeDofMap& dofs,
                       const VecXc& full_coeffs, const VectorField& field,
                       const VectorField& curl) {
  const auto& quad = default_tet_quadrature();
  Real l2 = 0, hc = 0;
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const TetFrame f = tet_frame(mesh, t);
    const auto& de = dofs.tet_edge[t];
    Vec3c curl_h = Vec3c::Zero();
    for (int a = 0; a < 6; ++a)
      curl_h += full_coeffs[de[a]] * dofs.tet_sign[t][a] *
                edge_basis_curl(f, a).cast<Complex>();
    for (const auto& qp : quad) {
      const Vec3 x = f.point(qp.bary);
      Vec3c Eh = Vec3c::Zero();
      for (int a = 0; a < 6; ++a)
        Eh += full_coeffs[de[a]] * dofs.tet_sign[t][a] *
              edge_basis(f, a, qp.bary).cast<Complex>();
      l2 += f.volume * qp.weight * (Eh - field(x)).squaredNorm();
      hc += f.volume * qp.weight * (curl_h - curl(x)).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(hc)};
}

Vec3c evaluate_field(const Mesh& mesh, const EdgeDofMap& dofs,
                     const VecXc& full_coeffs, int t,
                     const std::array<Real, 4>& bary) {
  const TetFrame f = tet_frame(mesh, t);
  Vec3c out = Vec3c::Zero();
  for (int a = 0; a < 6; ++a)
    out += full_coeffs[dofs.tet_edge[t][a]] * dofs.tet_sign[t][a] *
           edge_basis(f, a, bary).cast<Complex>();
  return out;
}

}  // namespace maxtomo
