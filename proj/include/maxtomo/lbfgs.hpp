// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_LBFGS_HPP
#define MAXTOMO_LBFGS_HPP

#include <functional>
#include <vector>

#include "maxtomo/types.hpp"

namespace maxtomo {

// Objective callback: returns the cost and, when grad != nullptr, fills the
// gradient. A cost-only call must be cheaper when the provider can exploit
// it (line-search probes pass grad = nullptr).
using Objective = std::function<Real(const VecX&, VecX* grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 60;
  // Stop when the accepted cost drops to `cost_threshold` (times the
  // initial cost when relative). `cost_floor` is an absolute lower bound on
  // the effective threshold so an already-converged start terminates
  // cleanly instead of chasing solver noise.
  Real cost_threshold = 0;
  bool threshold_relative = true;
  Real cost_floor = 0;
  Real armijo_c1 = 1e-4;
  int max_linesearch = 40;
};

enum class LbfgsStatus {
  CostThreshold,
  MaxIterations,
  LineSearchFailure,
};

struct LbfgsHistoryEntry {
  int iter;
  Real cost;
  Real grad_norm;  // 2-norm
  Real step;
};

struct LbfgsResult {
  VecX x;
  Real cost = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  int iterations = 0;
  std::vector<LbfgsHistoryEntry> history;  // entry 0 is the initial point
};

// Two-loop recursion L-BFGS with backtracking Armijo line search (step
// halving); accepted steps never increase the cost.
LbfgsResult lbfgs_minimize(const Objective& objective, VecX x0,
                           const LbfgsOptions& opts);

}  // namespace maxtomo

#endif  // MAXTOMO_LBFGS_HPP
