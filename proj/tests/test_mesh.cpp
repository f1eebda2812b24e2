// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "maxtomo/mesh.hpp"
#include "oracles.hpp"

using namespace maxtomo;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

const char* kSingleTet =
    "$Nodes\n4\n"
    "1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
    "$Tets\n1\n1 1 2 3 4 0\n"
    "$BoundaryTris\n4\n"
    "1 2 3 4 0\n2 1 3 4 0\n3 1 2 4 0\n4 1 2 3 0\n";

}  // namespace

TEST_CASE("load_mesh: single tetrahedron") {
  const auto path = temp_path("single.msh");
  write_file(path, kSingleTet);
  const Mesh m = load_mesh(path);
  CHECK(m.n_nodes() == 4);
  CHECK(m.n_tets() == 1);
  CHECK(m.boundary_tris.size() == 4);
  CHECK(m.tet_volume(0) == doctest::Approx(1.0 / 6.0));
  CHECK(m.tets[0].nodes[0] == 0);  // rebased to 0
}

TEST_CASE("load_mesh: uncovered boundary face is rejected") {
  const auto path = temp_path("uncovered.msh");
  write_file(path,
             "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
             "$Tets\n1\n1 1 2 3 4 0\n"
             "$BoundaryTris\n3\n1 2 3 4 0\n2 1 3 4 0\n3 1 2 4 0\n");
  CHECK_THROWS_WITH_AS(load_mesh(path),
                       doctest::Contains("uncovered boundary face"), Error);
}

TEST_CASE("load_mesh: parse error carries the line number") {
  const auto path = temp_path("badline.msh");
  write_file(path, "$Nodes\n2\n1 0 0 0\nnot-a-node\n");
  CHECK_THROWS_WITH_AS(load_mesh(path), doctest::Contains("line 4"), Error);
}

TEST_CASE("load_mesh: negative-volume tets are canonicalized") {
  const auto path = temp_path("flip.msh");
  // Swapped last two nodes relative to kSingleTet.
  write_file(path,
             "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
             "$Tets\n1\n1 1 2 4 3 0\n"
             "$BoundaryTris\n4\n1 2 3 4 0\n2 1 3 4 0\n3 1 2 4 0\n4 1 2 3 0\n");
  const Mesh m = load_mesh(path);
  CHECK(m.tet_volume(0) > 0);
}

TEST_CASE("six-tet cube: counts match the brute-force face oracle") {
  const Mesh m = oracles::make_six_tet_cube();
  CHECK(m.n_nodes() == 8);
  CHECK(m.n_tets() == 6);
  CHECK(static_cast<int>(m.boundary_tris.size()) == 12);
  CHECK(oracles::count_boundary_faces(m) == 12);
  Real vol = 0;
  for (int t = 0; t < m.n_tets(); ++t) vol += m.tet_volume(t);
  CHECK(vol == doctest::Approx(1.0));
}

TEST_CASE("mesh round-trip is bit-exact") {
  ChamberSpec spec;
  spec.h = 0.012;
  const Mesh a = generate_chamber_mesh(spec);
  const auto path = temp_path("roundtrip.msh");
  save_mesh(a, path);
  const Mesh b = load_mesh(path);
  REQUIRE(a.n_nodes() == b.n_nodes());
  REQUIRE(a.n_tets() == b.n_tets());
  for (int i = 0; i < a.n_nodes(); ++i) {
    CHECK(a.nodes[i].x() == b.nodes[i].x());
    CHECK(a.nodes[i].y() == b.nodes[i].y());
    CHECK(a.nodes[i].z() == b.nodes[i].z());
  }
  for (int t = 0; t < a.n_tets(); ++t) {
    CHECK(a.tets[t].nodes == b.tets[t].nodes);
    CHECK(a.tets[t].region == b.tets[t].region);
  }
  REQUIRE(a.boundary_tris.size() == b.boundary_tris.size());
  for (size_t i = 0; i < a.boundary_tris.size(); ++i) {
    CHECK(a.boundary_tris[i].nodes == b.boundary_tris[i].nodes);
    CHECK(a.boundary_tris[i].tag == b.boundary_tris[i].tag);
  }
}

TEST_CASE("chamber: port tags 1..8 are non-empty and partition the boundary") {
  ChamberSpec spec;  // 1 ring x 8 antennas
  spec.h = 0.01;
  const Mesh m = generate_chamber_mesh(spec);
  CHECK(m.n_ports() == 8);
  for (int p = 1; p <= 8; ++p) CHECK(!m.port_tris(p).empty());
  // Tagged tris cover the boundary exactly (validated on construction, and
  // their count matches the brute-force boundary-face count).
  CHECK(static_cast<int>(m.boundary_tris.size()) ==
        oracles::count_boundary_faces(m));
  // Each port rectangle holds at least 2 triangles.
  for (int p = 1; p <= 8; ++p) CHECK(m.port_tris(p).size() >= 2);
}

TEST_CASE("chamber: multi-ring tags are ring-major and z-ordered") {
  ChamberSpec spec;
  spec.n_rings = 2;
  spec.antennas_per_ring = 4;
  spec.height = 0.06;
  spec.h = 0.01;
  const Mesh m = generate_chamber_mesh(spec);
  CHECK(m.n_ports() == 8);
  auto mean_z = [&](int port) {
    Real z = 0;
    int c = 0;
    for (int t : m.port_tris(port))
      for (int v : m.boundary_tris[t].nodes) {
        z += m.nodes[v].z();
        ++c;
      }
    return z / c;
  };
  CHECK(mean_z(1) < mean_z(5));  // ring 0 below ring 1
}

TEST_CASE("chamber: oversized ports are rejected") {
  ChamberSpec spec;
  spec.port_width = 2.0 * pi * spec.radius / spec.antennas_per_ring;
  CHECK_THROWS_WITH_AS(generate_chamber_mesh(spec),
                       doctest::Contains("ports overlap"), Error);
  ChamberSpec tall;
  tall.n_rings = 3;
  tall.port_height = tall.height;  // bands collide
  CHECK_THROWS_WITH_AS(generate_chamber_mesh(tall),
                       doctest::Contains("ports overlap"), Error);
}

TEST_CASE("port_geometry recovers the exact panel rectangle") {
  ChamberSpec spec;
  spec.h = 0.008;
  const Mesh m = generate_chamber_mesh(spec);
  for (int p : {1, 3, 6}) {
    const PortGeometry g = port_geometry(m, p);
    CHECK(g.a == doctest::Approx(spec.port_width).epsilon(1e-12));
    CHECK(g.b == doctest::Approx(spec.port_height).epsilon(1e-12));
    CHECK(std::abs(g.eta_axis.z()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g.normal.dot(g.xi_axis)) < 1e-12);
    CHECK(std::abs(g.normal.dot(g.eta_axis)) < 1e-12);
    // Outward: from the axis towards the wall.
    Vec3 radial(g.origin.x(), g.origin.y(), 0);
    CHECK(g.normal.dot(radial.normalized()) > 0.9);
  }
}
