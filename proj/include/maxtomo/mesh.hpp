// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_MESH_HPP
#define MAXTOMO_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "maxtomo/types.hpp"

namespace maxtomo {

// Region tags: 0 = imaging region (parameter active), 1 = fixed background
// (e.g. waveguide ceramic).
struct Tet {
  std::array<int, 4> nodes;
  int region = 0;
};

// Surface tags: 0 = metallic wall, i >= 1 = port section i, -1 = absorbing
// (non-port impedance) surface.
inline constexpr int kTagMetal = 0;
inline constexpr int kTagAbsorbing = -1;

struct BoundaryTri {
  std::array<int, 3> nodes;
  int tag = kTagMetal;
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Tet> tets;
  std::vector<BoundaryTri> boundary_tris;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_tets() const { return static_cast<int>(tets.size()); }

  Vec3 tet_centroid(int t) const;
  Real tet_volume(int t) const;
  // Largest port tag present (0 if none).
  int n_ports() const;
  std::vector<int> port_tris(int port) const;
};

// Signed volume of the tet (a, b, c, d); positive for canonically ordered
// vertices.
Real signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Reorders vertices so every tet has positive signed volume, then checks all
// Mesh invariants. Throws Error(Config) naming the failing check.
void canonicalize_and_validate(Mesh& mesh);

// MSH-lite ASCII I/O. Node/tet ids in the file are 1-based; in-memory
// indices are 0-based. The writer emits 17 significant digits so that
// write -> load round-trips coordinates bit-exactly.
Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

struct ChamberSpec {
  Real radius = 0.06;            // m
  Real height = 0.03;            // m
  int n_rings = 1;
  int antennas_per_ring = 8;
  Real port_width = 0.02;        // a, m (azimuthal)
  Real port_height = 0.008;      // b, m (vertical)
  Real h = 0.006;                // target mesh size, m

  int n_ports() const { return n_rings * antennas_per_ring; }
};

// Flat rectangular port patch on the chamber wall. xi_axis spans the broad
// wall (width a), eta_axis is vertical (height b), normal points out of the
// chamber.
struct PortGeometry {
  int tag = 0;
  Vec3 origin;    // corner at (xi, eta) = (0, 0)
  Vec3 xi_axis;   // unit
  Vec3 eta_axis;  // unit
  Vec3 normal;    // unit, outward
  Real a = 0;
  Real b = 0;
};

// Builds a cylindrical chamber mesh. The lateral wall is polygonal; each
// antenna slot carries one flat panel of chord exactly `port_width`, and the
// port rectangle is tagged so its triangles tile that a x b rectangle
// exactly. Lateral/bottom walls are tagged 0 and the top cover -1. Port tags
// are assigned ring-major, azimuth-minor: tag = ring * antennas_per_ring +
// slot + 1, ring 0 at the bottom.
Mesh generate_chamber_mesh(const ChamberSpec& spec);

// Recovers the flat port frame from the triangles tagged `port`. The eta
// axis is the in-plane direction closest to global +z.
PortGeometry port_geometry(const Mesh& mesh, int port);

// Ring/slot bookkeeping for chamber meshes (tags assigned ring-major).
struct RingLayout {
  int n_rings = 1;
  int antennas_per_ring = 0;
  int ring_of(int port) const { return (port - 1) / antennas_per_ring; }
  int slot_of(int port) const { return (port - 1) % antennas_per_ring; }
  int tag_of(int ring, int slot) const {
    return ring * antennas_per_ring + slot + 1;
  }
};

}  // namespace maxtomo

#endif  // MAXTOMO_MESH_HPP
