// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_PORTS_HPP
#define MAXTOMO_PORTS_HPP

#include <vector>

#include "maxtomo/fem.hpp"

namespace maxtomo {

// Analytic TE10 aperture mode of one port, together with the discrete
// surface functionals derived from it. The overlap vector
//   q_e = int_Gamma w_e . E0
// is assembled once with a composite-refined surface rule and shared by
// the excitation RHS (i beta q), the S-parameter numerators and the
// adjoint port data, so all three see the same discrete functional.
struct PortMode {
  PortGeometry geom;
  Complex beta{0, 0};
  Real amplitude = 1.0;
  Real norm = 0;  // int_Gamma |E0|^2, same quadrature as `overlap`
  VecXc overlap;  // reduced DoF space

  // E0(x) = E0 sin(pi xi / a) eta_hat in the port frame.
  Vec3 e0(const Vec3& x) const;
};

// Builds the TE10 mode for one port. Throws below the cutoff frequency.
PortMode te10_mode(const Mesh& mesh, const DofNumbering& numbering,
                   const PortGeometry& geom, const PhysicsParams& params,
                   int quad_refine_levels = 6);

std::vector<PortMode> build_port_modes(const Mesh& mesh,
                                       const DofNumbering& numbering,
                                       const PhysicsParams& params,
                                       int quad_refine_levels = 6);

// Excitation block B = [b_1 ... b_N], b_j = i beta q_j. The TE10 aperture
// profile has normal curl, so the (curl E0) x n part of the trace datum
// vanishes identically.
MatXc assemble_port_rhs_block(const std::vector<PortMode>& ports, int n);

// int_Gamma_i conj(field) . E0_i evaluated with the port's own quadrature
// points; `field` is given analytically (used by trace-identity tests).
Complex port_overlap_analytic(const Mesh& mesh, const PortMode& port,
                              const VectorField& field,
                              int quad_refine_levels = 6);

}  // namespace maxtomo

#endif  // MAXTOMO_PORTS_HPP
