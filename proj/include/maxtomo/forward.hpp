// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_FORWARD_HPP
#define MAXTOMO_FORWARD_HPP

#include <memory>
#include <vector>

#include "maxtomo/ddm.hpp"
#include "maxtomo/gmres.hpp"
#include "maxtomo/scattering.hpp"

namespace maxtomo {

struct SolverOptions {
  int n_subdomains = 1;
  int overlap = 1;  // delta
  SchwarzVariant variant = SchwarzVariant::ORAS;
  PartitionStrategy strategy = PartitionStrategy::CoordinateBisection;
  Real tol = 1e-8;
  int max_iter = 500;
  int restart = 0;
  int threads = 1;
  int rhs_per_group = 0;  // 0 = one pseudo-block over all RHS
  int solver_groups = 1;  // concurrent transmitter groups
  int port_quad_refine = 6;
};

// Mesh-level state reused across material iterates: DoF numbering, port
// modes, decomposition and the subdomain structure.
struct ForwardContext {
  const Mesh* mesh = nullptr;
  PhysicsParams params;
  SolverOptions opts;
  DofNumbering numbering;
  std::vector<PortMode> ports;
  OverlapDecomposition decomp;
  DdmStructure ddm;
  ElementTemplates templates;

  static ForwardContext build(const Mesh& mesh, const PhysicsParams& params,
                              const SolverOptions& opts);
  int n_ports() const { return static_cast<int>(ports.size()); }
  std::vector<int> all_transmitters() const;
};

// Operator + preconditioner for one material iterate. The same pair serves
// the state and adjoint problems (the operator is complex symmetric).
struct AssembledOperator {
  SparseC A;
  std::shared_ptr<OrasPreconditioner> precond;
  Real setup_seconds = 0;

  BlockOperator op_A() const;
  BlockOperator op_M() const;
  // Grouped pseudo-block solve honoring rhs_per_group / solver_groups.
  MatXc solve(const ForwardContext& ctx, const MatXc& B, SolveStats* stats,
              Real tol_override = 0) const;
};

AssembledOperator assemble(const ForwardContext& ctx,
                           const MaterialField& material);

struct ForwardResult {
  MatXc fields;  // reduced DoF block, one column per transmitter
  ScatteringMatrix S;
  SolveStats stats;
  Real setup_seconds = 0;
  Real solve_seconds = 0;
};

// Solves all (or the given) transmitters and extracts S. Throws
// Error(Solver) when a column fails to converge.
ForwardResult forward_solve(const ForwardContext& ctx,
                            const MaterialField& material);
ForwardResult forward_solve(const ForwardContext& ctx,
                            const MaterialField& material,
                            const std::vector<int>& transmitters);

}  // namespace maxtomo

#endif  // MAXTOMO_FORWARD_HPP
