// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_GMRES_HPP
#define MAXTOMO_GMRES_HPP

#include <functional>
#include <vector>

#include "maxtomo/types.hpp"

namespace maxtomo {

// Applies an operator to a block of vectors (one column per RHS).
using BlockOperator = std::function<MatXc(const MatXc&)>;

struct GmresOptions {
  Real tol = 1e-8;     // on the unpreconditioned relative residual
  int max_iter = 500;  // Arnoldi vectors per cycle when restart == 0
  int restart = 0;     // 0 disables restarting
};

struct SolveStats {
  std::vector<int> iterations;   // per RHS
  std::vector<Real> residuals;   // ||b - A x|| / ||b||, recomputed at exit
  std::vector<char> converged;   // per RHS
  Real wall_seconds = 0;
  int restarts = 0;

  bool all_converged() const {
    for (char c : converged)
      if (!c) return false;
    return true;
  }
  int max_iterations() const {
    int m = 0;
    for (int it : iterations) m = std::max(m, it);
    return m;
  }
};

// Right-preconditioned pseudo-block GMRES: every column runs its own
// Arnoldi process (no shared Krylov subspace), while operator and
// preconditioner applications are fused into block calls. Per-column
// iterates are therefore identical to single-RHS runs. Convergence is
// monitored with the Arnoldi residual estimate, which for right
// preconditioning tracks the unpreconditioned residual; the explicit
// residual is recomputed at exit and iteration resumes once if it misses
// the tolerance by more than 10x. Non-convergence is flagged in the stats,
// not thrown.
MatXc gmres(const BlockOperator& apply_A, const BlockOperator& apply_M,
            const MatXc& B, const GmresOptions& opts,
            SolveStats* stats = nullptr);

// Single-RHS convenience wrapper.
VecXc gmres(const BlockOperator& apply_A, const BlockOperator& apply_M,
            const VecXc& b, const GmresOptions& opts,
            SolveStats* stats = nullptr);

}  // namespace maxtomo

#endif  // MAXTOMO_GMRES_HPP
