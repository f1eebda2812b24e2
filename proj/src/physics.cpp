// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/physics.hpp"

#include <cmath>
#include <string>

namespace maxtomo {

Real PhysicsParams::cutoff_frequency() const {
  return 1.0 / (2.0 * port_width * std::sqrt(mu0 * eps0 *
                                             eps_r_ceramic.real()));
}

Complex PhysicsParams::beta() const {
  const Real w = omega();
  if (w * w * mu0 * eps0 * eps_r_ceramic.real() <=
      (pi / port_width) * (pi / port_width))
    fail_config("operating frequency " + std::to_string(frequency) +
                " Hz is below the TE10 cutoff " +
                std::to_string(cutoff_frequency()) + " Hz");
  Complex b = std::sqrt(w * w * mu0 * eps0 * eps_r_ceramic -
                        Complex((pi / port_width) * (pi / port_width), 0.0));
  if (b.real() < 0) b = -b;
  return b;
}

Complex PhysicsParams::wavenumber(Complex eps_r) const {
  Complex k = omega() * std::sqrt(mu0 * eps0 * eps_r);
  if (k.real() < 0) k = -k;
  return k;
}

}  // namespace maxtomo
