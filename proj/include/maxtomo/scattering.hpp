// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_SCATTERING_HPP
#define MAXTOMO_SCATTERING_HPP

#include <string>
#include <vector>

#include "maxtomo/mesh.hpp"
#include "maxtomo/ports.hpp"

namespace maxtomo {

enum class Provenance { Simulated, SyntheticNoisy, EmptyReference };

// N x N scattering parameters, entries indexed (receiver, transmitter).
// The mask marks which entries are present; operations never read masked
// entries.
struct ScatteringMatrix {
  int n = 0;
  MatXc s;
  std::vector<char> mask;  // row-major (rx * n + tx)
  Provenance provenance = Provenance::Simulated;
  Real frequency = 0;

  static ScatteringMatrix empty(int n);
  bool valid(int rx, int tx) const { return mask[rx * n + tx] != 0; }
  Complex at(int rx, int tx) const;
  void set(int rx, int tx, Complex v);
};

// S_ij = int_Gamma_i conj(E_j) . E_i^0 / int_Gamma_i |E_i^0|^2, using each
// port's own overlap functional. `fields` holds one reduced-DoF column per
// transmitter in `transmitters` (1-based port tags). Receivers are all
// ports.
ScatteringMatrix compute_smatrix(const std::vector<PortMode>& ports,
                                 const MatXc& fields,
                                 const std::vector<int>& transmitters,
                                 Real frequency);

// Transmission normalization of one transmitter: every S_ij (fixed j) is
// divided by the coefficient at the directly opposite receiver, which
// becomes exactly 1. Throws if that coefficient is zero or masked.
VecXc normalize_row(const ScatteringMatrix& S, int tx, int opposite_rx);

// Directly opposite receiver: same ring, azimuth shifted by half a ring.
// Requires an even antenna count per ring.
int opposite_receiver(const RingLayout& layout, int tx);

// 20 log10(|s|); returns -infinity and sets *flagged for |s| = 0.
Real magnitude_db(Complex s, bool* flagged = nullptr);

// CSV I/O, header `tx,rx,re,im`, one line per valid entry in (tx, rx)
// lexicographic order, 17 significant digits (bit-exact round trip).
void save_smatrix(const ScatteringMatrix& S, const std::string& path);
ScatteringMatrix load_smatrix(const std::string& path);

}  // namespace maxtomo

#endif  // MAXTOMO_SCATTERING_HPP
