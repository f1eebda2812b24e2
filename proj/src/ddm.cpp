// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/ddm.hpp"

#include <algorithm>
#include <map>

#include "maxtomo/counters.hpp"
#include "maxtomo/parallel.hpp"

namespace maxtomo {

DdmStructure build_ddm_structure(const Mesh& mesh,
                                 const OverlapDecomposition& decomp,
                                 const DofNumbering& numbering,
                                 const ElementMatrices& elems,
                                 int n_threads) {
  DdmStructure s;
  s.n = numbering.n();
  s.locals.resize(decomp.n_subdomains);

  // Global boundary faces and the index of each tagged face in elems.faces.
  std::map<std::array<int, 3>, int> tagged;  // sorted nodes -> elems index
  std::map<std::array<int, 3>, char> global_boundary;
  for (size_t i = 0; i < elems.faces.size(); ++i) {
    const auto& tri = mesh.boundary_tris[elems.faces[i].tri];
    std::array<int, 3> key{tri.nodes[0], tri.nodes[1], tri.nodes[2]};
    std::sort(key.begin(), key.end());
    tagged[key] = static_cast<int>(i);
  }
  for (const auto& tri : mesh.boundary_tris) {
    std::array<int, 3> key{tri.nodes[0], tri.nodes[1], tri.nodes[2]};
    std::sort(key.begin(), key.end());
    global_boundary[key] = 1;
  }

  parallel_for(s.locals.size(), n_threads, [&](size_t i) {
    auto& loc = s.locals[i];
    const auto& sub = decomp.subdomains[i];
    loc.tets = sub.tets;

    // Restriction and weights on the reduced space.
    for (size_t k = 0; k < sub.dofs.size(); ++k) {
      int r = numbering.full_to_reduced[sub.dofs[k]];
      if (r < 0) continue;
      loc.dofs.push_back(r);
      loc.weights.push_back(sub.weights[k]);
    }

    // Faces of the local tet set appearing exactly once: physical boundary
    // keeps its global condition; the rest are interface faces.
    std::map<std::array<int, 3>, std::pair<int, int>> once;  // key -> (tet, opp)
    for (int t : loc.tets) {
      const auto& n = mesh.tets[t].nodes;
      for (int opp = 0; opp < 4; ++opp) {
        std::array<int, 3> key;
        int k = 0;
        for (int v = 0; v < 4; ++v)
          if (v != opp) key[k++] = n[v];
        std::sort(key.begin(), key.end());
        auto [it, inserted] = once.try_emplace(key, t, opp);
        if (!inserted) it->second.first = -1;
      }
    }
    for (const auto& [key, to] : once) {
      if (to.first < 0) continue;
      auto tg = tagged.find(key);
      if (tg != tagged.end()) {
        loc.tagged_faces.push_back(tg->second);
        continue;
      }
      if (global_boundary.count(key)) continue;  // metallic wall face
      BoundaryFace f;
      f.tri = -1;
      f.tet = to.first;
      f.tag = 0;
      const auto& n = mesh.tets[f.tet].nodes;
      int k = 0;
      for (int v = 0; v < 4; ++v)
        if (v != to.second) f.corner[k++] = v;
      const int pairs[3][2] = {{f.corner[0], f.corner[1]},
                               {f.corner[0], f.corner[2]},
                               {f.corner[1], f.corner[2]}};
      for (int e = 0; e < 3; ++e) {
        f.local_edge[e] = -1;
        for (int le = 0; le < 6; ++le)
          if ((kTetEdges[le][0] == pairs[e][0] &&
               kTetEdges[le][1] == pairs[e][1]) ||
              (kTetEdges[le][0] == pairs[e][1] &&
               kTetEdges[le][1] == pairs[e][0]))
            f.local_edge[e] = le;
      }
      Vec3 p0 = mesh.nodes[n[f.corner[0]]], p1 = mesh.nodes[n[f.corner[1]]],
           p2 = mesh.nodes[n[f.corner[2]]];
      Vec3 cr = (p1 - p0).cross(p2 - p0);
      f.area = cr.norm() / 2.0;
      f.normal = cr.normalized();
      if (f.normal.dot(mesh.nodes[n[to.second]] - p0) > 0) f.normal = -f.normal;
      loc.interface_faces.push_back(f);
    }
    loc.interface_raw.resize(loc.interface_faces.size());
    for (size_t k = 0; k < loc.interface_faces.size(); ++k)
      loc.interface_raw[k] =
          face_impedance_raw(mesh, numbering.edges, loc.interface_faces[k]);
  });
  return s;
}

OrasPreconditioner::OrasPreconditioner(
    const Mesh& mesh, const DdmStructure& structure,
    const DofNumbering& numbering, const ElementMatrices& elems,
    const MaterialField& material, const PhysicsParams& params,
    SchwarzVariant variant, const SparseC& A, int n_threads)
    : structure_(&structure), n_(structure.n), n_threads_(n_threads) {
  counters().factorizations++;
  const Complex ib = Complex(0, 1) * params.beta();
  locals_.resize(structure.locals.size());

  parallel_for(locals_.size(), n_threads, [&](size_t i) {
    const auto& loc = structure.locals[i];
    const int ni = static_cast<int>(loc.dofs.size());
    std::vector<int> g2l(n_, -1);
    for (int k = 0; k < ni; ++k) g2l[loc.dofs[k]] = k;

    std::vector<Eigen::Triplet<Complex>> trips;
    if (variant == SchwarzVariant::RAS) {
      // B_i = R_i A R_i^T.
      for (int k = 0; k < ni; ++k) {
        const int col = loc.dofs[k];
        for (SparseC::InnerIterator it(A, col); it; ++it) {
          const int lr = g2l[static_cast<int>(it.row())];
          if (lr >= 0) trips.emplace_back(lr, k, it.value());
        }
      }
    } else {
      for (int t : loc.tets) {
        const auto& de = numbering.edges.tet_edge[t];
        for (int a = 0; a < 6; ++a) {
          const int ra = numbering.full_to_reduced[de[a]];
          const int la = ra < 0 ? -1 : g2l[ra];
          if (la < 0) continue;
          for (int b = 0; b < 6; ++b) {
            const int rb = numbering.full_to_reduced[de[b]];
            const int lb = rb < 0 ? -1 : g2l[rb];
            if (lb < 0) continue;
            trips.emplace_back(la, lb, elems.tet[t](a, b));
          }
        }
      }
      // Physical impedance faces keep the global i*beta coefficient.
      for (int fi : loc.tagged_faces) {
        const auto& f = elems.faces[fi];
        const auto& de = numbering.edges.tet_edge[f.tet];
        for (int a = 0; a < 3; ++a) {
          const int ra = numbering.full_to_reduced[de[f.local_edge[a]]];
          const int la = ra < 0 ? -1 : g2l[ra];
          if (la < 0) continue;
          for (int b = 0; b < 3; ++b) {
            const int rb = numbering.full_to_reduced[de[f.local_edge[b]]];
            const int lb = rb < 0 ? -1 : g2l[rb];
            if (lb < 0) continue;
            trips.emplace_back(la, lb, ib * elems.face_raw[fi](a, b));
          }
        }
      }
      // Interface transmission term i k with the local wavenumber.
      for (size_t fi = 0; fi < loc.interface_faces.size(); ++fi) {
        const auto& f = loc.interface_faces[fi];
        Complex eps;
        if (mesh.tets[f.tet].region == 1) {
          eps = params.eps_r_ceramic;
        } else {
          eps = Complex(0, 0);
          const auto& n = mesh.tets[f.tet].nodes;
          for (int c = 0; c < 3; ++c)
            eps += material.eps_r[n[f.corner[c]]] / 3.0;
        }
        const Complex ik = Complex(0, 1) * params.wavenumber(eps);
        const auto& de = numbering.edges.tet_edge[f.tet];
        for (int a = 0; a < 3; ++a) {
          const int ra = numbering.full_to_reduced[de[f.local_edge[a]]];
          const int la = ra < 0 ? -1 : g2l[ra];
          if (la < 0) continue;
          for (int b = 0; b < 3; ++b) {
            const int rb = numbering.full_to_reduced[de[f.local_edge[b]]];
            const int lb = rb < 0 ? -1 : g2l[rb];
            if (lb < 0) continue;
            trips.emplace_back(la, lb, ik * loc.interface_raw[fi](a, b));
          }
        }
      }
    }

    auto& local = locals_[i];
    local.B.resize(ni, ni);
    local.B.setFromTriplets(trips.begin(), trips.end());
    local.B.makeCompressed();
    local.lu = std::make_unique<Eigen::SparseLU<SparseC>>();
    local.lu->compute(local.B);
    if (local.lu->info() != Eigen::Success)
      fail_solver("singular local factorization in subdomain " +
                  std::to_string(i));
  });
}

MatXc OrasPreconditioner::apply_block(const MatXc& X) const {
  if (X.rows() != n_) fail_internal("preconditioner dimension mismatch");
  const size_t ns = locals_.size();
  std::vector<MatXc> partial(ns);
  parallel_for(ns, n_threads_, [&](size_t i) {
    const auto& loc = structure_->locals[i];
    const int ni = static_cast<int>(loc.dofs.size());
    MatXc xi(ni, X.cols());
    for (int k = 0; k < ni; ++k) xi.row(k) = X.row(loc.dofs[k]);
    MatXc zi = locals_[i].lu->solve(xi);
    for (int k = 0; k < ni; ++k) zi.row(k) *= loc.weights[k];
    partial[i] = std::move(zi);
  });
  MatXc Y = MatXc::Zero(X.rows(), X.cols());
  for (size_t i = 0; i < ns; ++i) {
    const auto& loc = structure_->locals[i];
    for (int k = 0; k < static_cast<int>(loc.dofs.size()); ++k)
      Y.row(loc.dofs[k]) += partial[i].row(k);
  }
  return Y;
}

VecXc OrasPreconditioner::apply(const VecXc& x) const {
  return apply_block(x).col(0);
}

}  // namespace maxtomo
