// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_DDM_HPP
#define MAXTOMO_DDM_HPP

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "maxtomo/fem.hpp"
#include "maxtomo/partition.hpp"

namespace maxtomo {

enum class SchwarzVariant { ORAS, RAS };

// Geometry- and DoF-level structure of the local subproblems; independent
// of the material, so it is built once and reused across optimizer
// iterates.
struct LocalStructure {
  std::vector<int> dofs;       // global reduced DoF ids (sorted) = R_i
  std::vector<Real> weights;   // partition-of-unity diagonal D_i
  std::vector<int> tets;       // tets of T_i^delta
  std::vector<int> tagged_faces;  // indices into ElementMatrices::faces
  // Interface faces of the overlap boundary (not on the physical boundary):
  // the ORAS transmission term i k (E x n).(v x n) lives here.
  std::vector<BoundaryFace> interface_faces;
  std::vector<Eigen::Matrix3d> interface_raw;
};

struct DdmStructure {
  int n = 0;  // global reduced DoF count
  std::vector<LocalStructure> locals;
};

DdmStructure build_ddm_structure(const Mesh& mesh,
                                 const OverlapDecomposition& decomp,
                                 const DofNumbering& numbering,
                                 const ElementMatrices& elems,
                                 int n_threads = 1);

// One-level Schwarz preconditioner M^-1 = sum_i R_i^T D_i B_i^-1 R_i with
// exact sparse LU subdomain solves.
class OrasPreconditioner {
 public:
  // For ORAS, B_i re-assembles the variational form on T_i^delta with the
  // transmission term on interface faces (k evaluated from the local eps_r
  // at the face centroid). For RAS, B_i = R_i A R_i^T extracted from the
  // assembled global operator.
  OrasPreconditioner(const Mesh& mesh, const DdmStructure& structure,
                     const DofNumbering& numbering,
                     const ElementMatrices& elems,
                     const MaterialField& material,
                     const PhysicsParams& params, SchwarzVariant variant,
                     const SparseC& A, int n_threads = 1);

  VecXc apply(const VecXc& x) const;
  MatXc apply_block(const MatXc& X) const;

  int size() const { return n_; }
  int n_subdomains() const { return static_cast<int>(locals_.size()); }
  // Local matrix of subdomain i (tests).
  const SparseC& local_matrix(int i) const { return locals_[i].B; }
  const std::vector<int>& local_dofs(int i) const {
    return structure_->locals[i].dofs;
  }

 private:
  struct Local {
    SparseC B;
    std::unique_ptr<Eigen::SparseLU<SparseC>> lu;
  };
  const DdmStructure* structure_;
  std::vector<Local> locals_;
  int n_ = 0;
  int n_threads_ = 1;
};

}  // namespace maxtomo

#endif  // MAXTOMO_DDM_HPP
