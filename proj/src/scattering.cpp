// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/scattering.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace maxtomo {

ScatteringMatrix ScatteringMatrix::empty(int n) {
  ScatteringMatrix S;
  S.n = n;
  S.s = MatXc::Zero(n, n);
  S.mask.assign(static_cast<size_t>(n) * n, 0);
  return S;
}

Complex ScatteringMatrix::at(int rx, int tx) const {
  if (!valid(rx, tx))
    fail_internal("read of masked S entry (" + std::to_string(rx) + "," +
                  std::to_string(tx) + ")");
  return s(rx, tx);
}

void ScatteringMatrix::set(int rx, int tx, Complex v) {
  s(rx, tx) = v;
  mask[rx * n + tx] = 1;
}

ScatteringMatrix compute_smatrix(const std::vector<PortMode>& ports,
                                 const MatXc& fields,
                                 const std::vector<int>& transmitters,
                                 Real frequency) {
  if (fields.cols() != static_cast<Eigen::Index>(transmitters.size()))
    fail_internal("missing field column: " +
                  std::to_string(transmitters.size()) + " transmitters, " +
                  std::to_string(fields.cols()) + " columns");
  const int n = static_cast<int>(ports.size());
  ScatteringMatrix S = ScatteringMatrix::empty(n);
  S.frequency = frequency;
  S.provenance = Provenance::Simulated;
  for (size_t c = 0; c < transmitters.size(); ++c) {
    const int tx = transmitters[c] - 1;
    for (int rx = 0; rx < n; ++rx) {
      // conj(u_j)^T q_i / nu_i; Eigen's dot conjugates its left operand.
      const Complex num = fields.col(c).dot(ports[rx].overlap);
      S.set(rx, tx, num / ports[rx].norm);
    }
  }
  return S;
}

VecXc normalize_row(const ScatteringMatrix& S, int tx, int opposite_rx) {
  if (!S.valid(opposite_rx, tx))
    fail_config("opposite coefficient (" + std::to_string(opposite_rx) + "," +
                std::to_string(tx) + ") is masked");
  const Complex ref = S.at(opposite_rx, tx);
  if (ref == Complex(0, 0))
    fail_config("opposite coefficient is zero for transmitter " +
                std::to_string(tx));
  VecXc row(S.n);
  for (int rx = 0; rx < S.n; ++rx)
    row[rx] = S.valid(rx, tx) ? S.at(rx, tx) / ref : Complex(0, 0);
  row[opposite_rx] = Complex(1, 0);
  return row;
}

int opposite_receiver(const RingLayout& layout, int tx) {
  if (layout.antennas_per_ring % 2 != 0)
    fail_config("opposite-antenna normalization needs an even antenna count "
                "per ring, got " +
                std::to_string(layout.antennas_per_ring));
  const int ring = layout.ring_of(tx);
  const int slot =
      (layout.slot_of(tx) + layout.antennas_per_ring / 2) %
      layout.antennas_per_ring;
  return layout.tag_of(ring, slot);
}

Real magnitude_db(Complex s, bool* flagged) {
  const Real mag = std::abs(s);
  if (mag == 0) {
    if (flagged) *flagged = true;
    return -std::numeric_limits<Real>::infinity();
  }
  if (flagged) *flagged = false;
  return 20.0 * std::log10(mag);
}

void save_smatrix(const ScatteringMatrix& S, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_config("cannot open '" + path + "' for writing");
  out << "tx,rx,re,im\n";
  char buf[96];
  for (int tx = 0; tx < S.n; ++tx)
    for (int rx = 0; rx < S.n; ++rx) {
      if (!S.valid(rx, tx)) continue;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", tx + 1, rx + 1,
                    S.s(rx, tx).real(), S.s(rx, tx).imag());
      out << buf;
    }
  if (!out) fail_config("write failed for '" + path + "'");
}

ScatteringMatrix load_smatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_config("cannot open S-matrix CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "tx,rx,re,im")
    fail_config("S-matrix CSV '" + path + "': expected header tx,rx,re,im");
  struct Entry {
    int tx, rx;
    Complex v;
  };
  std::vector<Entry> entries;
  int n = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long tx, rx;
    double re, im;
    char c1, c2, c3;
    if (!(ss >> tx >> c1 >> rx >> c2 >> re >> c3 >> im) || c1 != ',' ||
        c2 != ',' || c3 != ',')
      fail_config("S-matrix CSV line " + std::to_string(lineno) +
                  ": malformed");
    if (tx < 1 || rx < 1)
      fail_config("S-matrix CSV line " + std::to_string(lineno) +
                  ": indices must be >= 1");
    entries.push_back({static_cast<int>(tx), static_cast<int>(rx),
                       Complex(re, im)});
    n = std::max({n, static_cast<int>(tx), static_cast<int>(rx)});
  }
  ScatteringMatrix S = ScatteringMatrix::empty(n);
  for (const auto& e : entries) S.set(e.rx - 1, e.tx - 1, e.v);
  return S;
}

}  // namespace maxtomo
