// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_INVERSE_HPP
#define MAXTOMO_INVERSE_HPP

#include <optional>
#include <vector>

#include "maxtomo/forward.hpp"
#include "maxtomo/lbfgs.hpp"
#include "maxtomo/phantom.hpp"

namespace maxtomo {

struct InverseConfig {
  Real alpha = 1e-6;               // Tikhonov weight on kappa
  bool normalize = true;           // divide each misfit term by |S_empty|^2
  int memory = 10;                 // L-BFGS history pairs
  int max_iterations = 60;
  Real cost_threshold = 1e-2;      // J <= threshold * J0 when relative
  bool threshold_relative = true;
  std::vector<int> transmitters;   // empty = all ports
  std::vector<char> active_nodes;  // empty = all imaging-region nodes
};

// Ring truncation of a chamber mesh: the selected ring's antennas plus at
// most one ring above and below; cut surfaces become absorbing (-1). Port
// tags are compacted to 1..K; port_orig maps them back.
struct TruncatedMesh {
  Mesh mesh;
  std::vector<int> node_map;   // sub node -> original node
  std::vector<int> port_orig;  // new tag (1-based) -> original tag
  std::vector<int> transmitters;  // new tags of the selected ring
};

TruncatedMesh truncate_for_ring(const Mesh& mesh, const RingLayout& layout,
                                Real chamber_height, int ring);

// Remaps an S matrix given in original port tags onto the truncated
// numbering (masked where ports are absent).
ScatteringMatrix remap_smatrix(const ScatteringMatrix& S,
                               const std::vector<int>& port_orig);

// Misfit + Tikhonov functional, its adjoint-state gradient and the L-BFGS
// driver. The optimization variable is the complex nodal eps_r over the
// active nodes, handled as 2*|active| reals (Re, Im pairs, node-major).
class InverseDriver {
 public:
  InverseDriver(const ForwardContext& ctx, ScatteringMatrix s_mes,
                ScatteringMatrix s_empty, InverseConfig cfg);

  struct CostEvaluation {
    Real J = 0, J_misfit = 0, J_reg = 0;
    MatXc fields;  // state solutions, one column per transmitter
    ScatteringMatrix S;
    AssembledOperator op;
    std::uint64_t stamp = 0;  // material version, guards gradient reuse
  };

  // Solves the state problem for all configured transmitters and assembles
  // the functional.
  CostEvaluation evaluate_cost(const MaterialField& m) const;
  // Adjoint solves with the same operator and preconditioner as the state.
  MatXc solve_adjoint(const CostEvaluation& eval) const;
  // Gradient w.r.t. (Re eps_r, Im eps_r) at the active nodes; zero
  // elsewhere. `m` must be the iterate `eval` was computed from.
  VecX compute_gradient(const MaterialField& m, const CostEvaluation& eval,
                        const MatXc& adjoints) const;

  // Verification route: solves the linearized problem for a kappa
  // perturbation and evaluates DJ through the S-parameter chain.
  MatXc solve_linearized(const CostEvaluation& eval,
                         const std::vector<Complex>& dkappa) const;
  Real dj_via_linearized(const CostEvaluation& eval,
                         const std::vector<Complex>& dkappa) const;

  // Packed-variable objective for the optimizer (memoizes the last state
  // solve so the gradient call after a line-search probe reuses it).
  Real evaluate(const VecX& x, VecX* grad) const;

  LbfgsResult minimize(const MaterialField& initial);

  MaterialField unpack(const VecX& x) const;
  VecX pack(const MaterialField& m) const;
  const std::vector<int>& active() const { return active_; }
  const std::vector<int>& transmitters() const { return tx_; }
  Real solver_noise_floor() const;

 private:
  // Per-tet data of the Tikhonov form, over fully-active imaging tets.
  // Element-wise evaluation keeps the term exactly zero for constant
  // fields (the barycentric gradients of a tet sum to exactly zero).
  struct RegTet {
    std::array<int, 4> slot;
    std::array<Vec3, 4> grad;
    Real volume;
  };

  Real reg_value(const VecX& re, const VecX& im) const;
  void reg_gradient(const VecX& re, const VecX& im, VecX& g) const;

  const ForwardContext* ctx_;
  ScatteringMatrix s_mes_, s_empty_;
  InverseConfig cfg_;
  std::vector<int> tx_;        // transmitter port tags
  std::vector<int> active_;    // active node ids
  std::vector<int> node_slot_; // node -> index into active_, or -1
  std::vector<RegTet> reg_tets_;
  MaterialField base_;         // holds values of fixed nodes
  bool base_set_ = false;
  mutable std::optional<std::pair<VecX, CostEvaluation>> memo_;

  friend class InverseProblemTestAccess;
};

// Weights w_ij (1 or 1/|S_empty|^2) and residuals r_ij = w_ij (S - S_mes);
// shared between the cost, the adjoint data and the linearized route.
struct MisfitTerms {
  std::vector<int> rx, tx;  // 0-based indices per term
  std::vector<Real> weight;
  std::vector<Complex> residual;
  Real value = 0;  // 1/2 sum w |S - S_mes|^2
};

}  // namespace maxtomo

#endif  // MAXTOMO_INVERSE_HPP
