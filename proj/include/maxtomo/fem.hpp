// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_FEM_HPP
#define MAXTOMO_FEM_HPP

#include <array>
#include <functional>
#include <vector>

#include "maxtomo/edge_dofs.hpp"
#include "maxtomo/material.hpp"
#include "maxtomo/mesh.hpp"
#include "maxtomo/physics.hpp"
#include "maxtomo/quadrature.hpp"

namespace maxtomo {

using Vec3c = Eigen::Vector3cd;
using VectorField = std::function<Vec3c(const Vec3&)>;
using Mat6c = Eigen::Matrix<Complex, 6, 6>;

// Affine geometry of one tet: barycentric gradients are constant.
struct TetFrame {
  std::array<Vec3, 4> node;
  std::array<Vec3, 4> grad_lambda;
  Real volume = 0;

  Vec3 point(const std::array<Real, 4>& bary) const {
    return bary[0] * node[0] + bary[1] * node[1] + bary[2] * node[2] +
           bary[3] * node[3];
  }
};

TetFrame tet_frame(const Mesh& mesh, int t);

// Edge basis w^e = lambda_i grad(lambda_j) - lambda_j grad(lambda_i) for
// local edge (i, j); curl is the constant 2 grad(lambda_i) x grad(lambda_j).
// Global orientation is obtained by multiplying with EdgeDofMap::tet_sign.
Vec3 edge_basis(const TetFrame& f, int local_edge,
                const std::array<Real, 4>& bary);
Vec3 edge_basis_curl(const TetFrame& f, int local_edge);

// Reduced DoF numbering after symmetric elimination of the metallic-wall
// edges (E x n = 0 on tag-0 surfaces).
struct DofNumbering {
  EdgeDofMap edges;
  std::vector<int> full_to_reduced;  // -1 for eliminated DoFs
  std::vector<int> reduced_to_full;

  int n_full() const { return edges.n_dofs(); }
  int n() const { return static_cast<int>(reduced_to_full.size()); }

  VecXc expand(const VecXc& reduced) const;
  VecXc reduce(const VecXc& full) const;
};

DofNumbering build_dof_numbering(const Mesh& mesh);

// Boundary triangle resolved to its owning tet.
struct BoundaryFace {
  int tri = -1;
  int tet = -1;
  int tag = 0;
  std::array<int, 3> corner;      // tet-local node indices of the face
  std::array<int, 3> local_edge;  // tet-local edge slots of the face edges
  Vec3 normal;                    // outward unit
  Real area = 0;
};

std::vector<BoundaryFace> boundary_faces(const Mesh& mesh);

// Volume contribution of one tet in global edge orientation:
//   mat(a, b) = int_T (curl w_a . curl w_b - kappa w_a . w_b).
Mat6c tet_volume_matrix(const Mesh& mesh, const EdgeDofMap& dofs, int t,
                        const MaterialField& material,
                        const PhysicsParams& params);

// Raw impedance face matrix int_F (w_a x n).(w_b x n) for the three face
// edges, in global orientation; multiply by i*beta (boundary conditions) or
// i*k (interface transmission) to get the surface term.
Eigen::Matrix3d face_impedance_raw(const Mesh& mesh, const EdgeDofMap& dofs,
                                   const BoundaryFace& face);

// All element contributions of the global operator, computed in parallel
// and merged in deterministic order by the assemblers below.
struct ElementMatrices {
  std::vector<Mat6c> tet;            // per tet
  std::vector<BoundaryFace> faces;   // tagged impedance faces (tag != 0)
  std::vector<Eigen::Matrix3d> face_raw;
};

// Material-independent per-tet integrals: the curl-curl block and the four
// nodal mass moments int_T lambda_k w_a . w_b. A tet's volume matrix for a
// P1 coefficient kappa is stiffness - sum_k kappa_k mass[k], so optimizer
// iterates reuse these across assemblies.
struct ElementTemplates {
  using Mat6 = Eigen::Matrix<Real, 6, 6>;
  std::vector<Mat6> stiffness;
  std::vector<std::array<Mat6, 4>> mass;
};

ElementTemplates build_element_templates(const Mesh& mesh,
                                         const EdgeDofMap& dofs,
                                         int n_threads = 1);

ElementMatrices compute_element_matrices(const Mesh& mesh,
                                         const DofNumbering& numbering,
                                         const MaterialField& material,
                                         const PhysicsParams& params,
                                         int n_threads = 1,
                                         const ElementTemplates* templates =
                                             nullptr);

// Global curl-curl operator on the reduced space (complex symmetric). The
// impedance term i*beta (E x n).(v x n) is applied on every tagged surface
// with tag != 0 (ports and absorbing).
SparseC assemble_operator(const Mesh& mesh, const DofNumbering& numbering,
                          const ElementMatrices& elems,
                          const PhysicsParams& params);

// Convenience: element matrices + operator in one call.
SparseC assemble_operator(const Mesh& mesh, const DofNumbering& numbering,
                          const MaterialField& material,
                          const PhysicsParams& params, int n_threads = 1);

// Load vector of an analytic volume source: b_e = int_Omega J . w_e.
VecXc assemble_volume_source(const Mesh& mesh, const DofNumbering& numbering,
                             const VectorField& J);

// Load vector int_Omega dkappa E_h . w_e with P1 nodal dkappa, restricted
// to imaging-region tets (kappa is fixed elsewhere). E is a reduced vector.
VecXc assemble_field_scaled_source(const Mesh& mesh,
                                   const DofNumbering& numbering,
                                   const std::vector<Complex>& dkappa,
                                   const VecXc& E);

// Impedance data on surfaces with the given tag:
//   b_e = int_Gamma [(curl F) x n + i beta n x (F x n)] . w_e.
VecXc assemble_surface_data(const Mesh& mesh, const DofNumbering& numbering,
                            int tag, const VectorField& field,
                            const VectorField& curl, Complex beta);

// Circulation (1/|e|) int_e field . t_e along the segment from a to b,
// two-point Gauss (exact for affine fields).
Complex segment_circulation(const VectorField& field, const Vec3& a,
                            const Vec3& b);

// Circulations for every mesh edge (full numbering).
VecXc circulations_of(const Mesh& mesh, const EdgeDofMap& dofs,
                      const VectorField& field);

// L2 and H(curl)-seminorm errors of a FE field (full-edge coefficients)
// against an analytic field.
struct FieldError {
  Real l2 = 0;
  Real hcurl_semi = 0;
};
FieldError hcurl_error(const Mesh& mesh, const EdgeDofMap& dofs,
                       const VecXc& full_coeffs, const VectorField& field,
                       const VectorField& curl);

// Evaluates the FE field at a barycentric point of tet t.
Vec3c evaluate_field(const Mesh& mesh, const EdgeDofMap& dofs,
                     const VecXc& full_coeffs, int t,
                     const std::array<Real, 4>& bary);

}  // namespace maxtomo

#endif  // MAXTOMO_FEM_HPP
