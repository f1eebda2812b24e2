// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/forward.hpp"

#include <chrono>
#include <numeric>

#include "maxtomo/parallel.hpp"

namespace maxtomo {

namespace {

using Clock = std::chrono::steady_clock;

Real seconds_since(Clock::time_point t0) {
  return std::chrono::duration<Real>(Clock::now() - t0).count();
}

}  // namespace

ForwardContext ForwardContext::build(const Mesh& mesh,
                                     const PhysicsParams& params,
                                     const SolverOptions& opts) {
  ForwardContext ctx;
  ctx.mesh = &mesh;
  ctx.params = params;
  ctx.opts = opts;
  ctx.numbering = build_dof_numbering(mesh);
  ctx.ports = build_port_modes(mesh, ctx.numbering, params,
                               opts.port_quad_refine);
  auto assignment = partition(mesh, opts.n_subdomains, opts.strategy);
  const int delta = opts.n_subdomains > 1 ? std::max(1, opts.overlap)
                                          : opts.overlap;
  ctx.decomp = grow_overlap(mesh, assignment, delta);
  build_partition_of_unity(ctx.decomp, mesh, ctx.numbering.edges);
  ctx.templates =
      build_element_templates(mesh, ctx.numbering.edges, opts.threads);
  // The subdomain structure needs the boundary-face list; element values
  // are not used, so any material works here.
  auto elems = compute_element_matrices(
      mesh, ctx.numbering, MaterialField::uniform(mesh, Complex(1, 0)),
      params, opts.threads, &ctx.templates);
  ctx.ddm = build_ddm_structure(mesh, ctx.decomp, ctx.numbering, elems,
                                opts.threads);
  return ctx;
}

std::vector<int> ForwardContext::all_transmitters() const {
  std::vector<int> tx(ports.size());
  std::iota(tx.begin(), tx.end(), 1);
  return tx;
}

BlockOperator AssembledOperator::op_A() const {
  const SparseC* A_ = &A;
  return [A_](const MatXc& X) -> MatXc { return (*A_) * X; };
}

BlockOperator AssembledOperator::op_M() const {
  auto p = precond;
  return [p](const MatXc& X) -> MatXc { return p->apply_block(X); };
}

AssembledOperator assemble(const ForwardContext& ctx,
                           const MaterialField& material) {
  const auto t0 = Clock::now();
  AssembledOperator op;
  auto elems =
      compute_element_matrices(*ctx.mesh, ctx.numbering, material, ctx.params,
                               ctx.opts.threads, &ctx.templates);
  op.A = assemble_operator(*ctx.mesh, ctx.numbering, elems, ctx.params);
  op.precond = std::make_shared<OrasPreconditioner>(
      *ctx.mesh, ctx.ddm, ctx.numbering, elems, material, ctx.params,
      ctx.opts.variant, op.A, ctx.opts.threads);
  op.setup_seconds = seconds_since(t0);
  return op;
}

MatXc AssembledOperator::solve(const ForwardContext& ctx, const MatXc& B,
                               SolveStats* stats, Real tol_override) const {
  GmresOptions gopts;
  gopts.tol = tol_override > 0 ? tol_override : ctx.opts.tol;
  gopts.max_iter = ctx.opts.max_iter;
  gopts.restart = ctx.opts.restart;

  const int m = static_cast<int>(B.cols());
  const int group = ctx.opts.rhs_per_group > 0
                        ? std::min(ctx.opts.rhs_per_group, m)
                        : m;
  const int n_groups = (m + group - 1) / group;

  MatXc X(B.rows(), m);
  std::vector<SolveStats> gstats(n_groups);
  auto solve_group = [&](size_t g) {
    const int lo = static_cast<int>(g) * group;
    const int cols = std::min(group, m - lo);
    const MatXc Bg = B.middleCols(lo, cols);
    X.middleCols(lo, cols) = gmres(op_A(), op_M(), Bg, gopts, &gstats[g]);
  };
  parallel_for(static_cast<size_t>(n_groups),
               std::min(ctx.opts.solver_groups, n_groups), solve_group);

  if (stats) {
    stats->iterations.clear();
    stats->residuals.clear();
    stats->converged.clear();
    stats->wall_seconds = 0;
    stats->restarts = 0;
    for (const auto& gs : gstats) {
      stats->iterations.insert(stats->iterations.end(),
                               gs.iterations.begin(), gs.iterations.end());
      stats->residuals.insert(stats->residuals.end(), gs.residuals.begin(),
                              gs.residuals.end());
      stats->converged.insert(stats->converged.end(), gs.converged.begin(),
                              gs.converged.end());
      stats->wall_seconds += gs.wall_seconds;
      stats->restarts += gs.restarts;
    }
  }
  return X;
}

ForwardResult forward_solve(const ForwardContext& ctx,
                            const MaterialField& material) {
  return forward_solve(ctx, material, ctx.all_transmitters());
}

ForwardResult forward_solve(const ForwardContext& ctx,
                            const MaterialField& material,
                            const std::vector<int>& transmitters) {
  ForwardResult res;
  const auto op = assemble(ctx, material);
  res.setup_seconds = op.setup_seconds;

  MatXc B(ctx.numbering.n(), static_cast<int>(transmitters.size()));
  for (size_t c = 0; c < transmitters.size(); ++c) {
    const int p = transmitters[c];
    if (p < 1 || p > ctx.n_ports())
      fail_config("transmitter " + std::to_string(p) + " out of range");
    B.col(static_cast<int>(c)) =
        Complex(0, 1) * ctx.ports[p - 1].beta * ctx.ports[p - 1].overlap;
  }

  const auto t0 = Clock::now();
  res.fields = op.solve(ctx, B, &res.stats);
  res.solve_seconds = seconds_since(t0);
  for (size_t c = 0; c < transmitters.size(); ++c)
    if (!res.stats.converged[c])
      fail_solver("forward solve for transmitter " +
                  std::to_string(transmitters[c]) +
                  " did not reach the residual tolerance (residual " +
                  std::to_string(res.stats.residuals[c]) + ")");
  res.S = compute_smatrix(ctx.ports, res.fields, transmitters,
                          ctx.params.frequency);
  return res;
}

}  // namespace maxtomo
