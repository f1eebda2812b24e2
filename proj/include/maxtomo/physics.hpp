// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_PHYSICS_HPP
#define MAXTOMO_PHYSICS_HPP

#include "maxtomo/types.hpp"

namespace maxtomo {

struct PhysicsParams {
  Real frequency = 1e9;              // Hz
  Complex eps_r_ceramic{59.0, 0.0};  // inside ceramic-loaded waveguides
  Real port_width = 0.02;            // a (m), broad wall
  Real port_height = 0.008;          // b (m)
  Real amplitude = 1.0;              // E0 (V/m); observable-neutral

  Real omega() const { return 2.0 * pi * frequency; }
  // kappa(x) = omega^2 mu0 eps0 eps_r(x); this is the eps_r -> kappa scale.
  Real kappa_scale() const { return omega() * omega() * mu0 * eps0; }

  // TE10 cutoff of the ceramic-loaded guide (Hz).
  Real cutoff_frequency() const;
  // Propagation wavenumber beta = sqrt(omega^2 mu0 eps0 eps_r_cer -
  // (pi/a)^2), root with positive real part. Throws below cutoff.
  Complex beta() const;

  // Local wavenumber k = omega sqrt(mu0 eps0 eps_r), positive-real-part
  // branch; used in the interface transmission conditions.
  Complex wavenumber(Complex eps_r) const;
};

}  // namespace maxtomo

#endif  // MAXTOMO_PHYSICS_HPP
