// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "maxtomo/phantom.hpp"
#include "oracles.hpp"

using namespace maxtomo;

namespace {

Mesh tiny_chamber() {
  ChamberSpec spec;
  spec.h = 0.014;
  return generate_chamber_mesh(spec);
}

ScatteringMatrix full_matrix(int n, Complex base) {
  ScatteringMatrix S = ScatteringMatrix::empty(n);
  for (int rx = 0; rx < n; ++rx)
    for (int tx = 0; tx < n; ++tx)
      S.set(rx, tx, base + Complex(0.01 * rx, -0.01 * tx));
  return S;
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("phantom: gel-only field is uniform 44 - 20i") {
  const Mesh m = tiny_chamber();
  PhantomSpec spec;
  const MaterialField f = build_phantom(spec, m);
  for (const Complex& v : f.eps_r) {
    CHECK(v.real() == 44.0);
    CHECK(v.imag() == -20.0);
  }
}

TEST_CASE("phantom: mean-with-blood rule averages with 68 - 44i") {
  const Mesh m = tiny_chamber();
  PhantomSpec spec;
  spec.background = Complex(50, -30);
  Ellipsoid e;
  e.center = Vec3(0.01, 0.0, 0.015);
  e.semi_axes = Vec3(0.02, 0.015, 0.012);
  spec.stroke = e;
  spec.rule = StrokeRule::MeanWithBlood;
  const MaterialField f = build_phantom(spec, m);
  int inside = 0;
  for (int v = 0; v < m.n_nodes(); ++v) {
    if (e.contains(m.nodes[v])) {
      CHECK(f.eps_r[v] == Complex(59, -37));
      ++inside;
    } else {
      CHECK(f.eps_r[v] == Complex(50, -30));
    }
  }
  CHECK(inside > 0);
  // All phantom values stay dissipative.
  for (const Complex& v : f.eps_r) CHECK(v.imag() <= 0.0);
}

TEST_CASE("phantom: zero-volume and out-of-mesh ellipsoids are errors") {
  const Mesh m = tiny_chamber();
  PhantomSpec spec;
  Ellipsoid e;
  e.center = Vec3(0, 0, 0.015);
  e.semi_axes = Vec3(0.01, 0.0, 0.01);
  spec.stroke = e;
  CHECK_THROWS_WITH_AS((void)build_phantom(spec, m),
                       doctest::Contains("zero semi-axis"), Error);
  e.semi_axes = Vec3(0.005, 0.005, 0.005);
  e.center = Vec3(1.0, 1.0, 1.0);  // far outside
  spec.stroke = e;
  CHECK_THROWS_WITH_AS((void)build_phantom(spec, m),
                       doctest::Contains("outside the mesh"), Error);
}

TEST_CASE("phantom: non-dissipative inputs are rejected") {
  const Mesh m = tiny_chamber();
  PhantomSpec spec;
  spec.background = Complex(44, +2);
  CHECK_THROWS_WITH_AS((void)build_phantom(spec, m),
                       doctest::Contains("dissipative"), Error);
}

TEST_CASE("noise: level zero is the identity") {
  const auto S = full_matrix(6, Complex(0.4, -0.7));
  const auto N = add_noise(S, 0.0, 123);
  for (int rx = 0; rx < 6; ++rx)
    for (int tx = 0; tx < 6; ++tx) {
      CHECK(N.at(rx, tx).real() == S.at(rx, tx).real());
      CHECK(N.at(rx, tx).imag() == S.at(rx, tx).imag());
    }
  CHECK(N.provenance == Provenance::SyntheticNoisy);
}

TEST_CASE("noise: fixed seed reproduces bit-identical output") {
  const auto S = full_matrix(8, Complex(1.0, -0.5));
  const auto A = add_noise(S, 0.1, 42);
  const auto B = add_noise(S, 0.1, 42);
  for (int rx = 0; rx < 8; ++rx)
    for (int tx = 0; tx < 8; ++tx) {
      CHECK(A.at(rx, tx).real() == B.at(rx, tx).real());
      CHECK(A.at(rx, tx).imag() == B.at(rx, tx).imag());
    }
  const auto C = add_noise(S, 0.1, 43);
  bool differs = false;
  for (int rx = 0; rx < 8; ++rx)
    for (int tx = 0; tx < 8; ++tx)
      if (C.at(rx, tx) != A.at(rx, tx)) differs = true;
  CHECK(differs);
}

TEST_CASE("noise: sample std of the real perturbation matches the level") {
  // 10^4 unit-magnitude entries at level 0.1: sample std within [0.097,
  // 0.103] (3 sigma for n = 10^4).
  const int n = 100;
  ScatteringMatrix S = ScatteringMatrix::empty(n);
  for (int rx = 0; rx < n; ++rx)
    for (int tx = 0; tx < n; ++tx) S.set(rx, tx, Complex(1.0, 0.0));
  const auto N = add_noise(S, 0.1, 7);
  Real sum = 0, sum2 = 0;
  const int count = n * n;
  for (int rx = 0; rx < n; ++rx)
    for (int tx = 0; tx < n; ++tx) {
      const Real d = N.at(rx, tx).real() - 1.0;
      sum += d;
      sum2 += d * d;
    }
  const Real mean = sum / count;
  const Real std = std::sqrt(sum2 / count - mean * mean);
  CHECK(std >= 0.097);
  CHECK(std <= 0.103);
}

TEST_CASE("noise: averaging many copies recovers the input") {
  const int copies = 10000;
  ScatteringMatrix S = ScatteringMatrix::empty(2);
  S.set(0, 0, Complex(0.8, -0.3));
  S.set(1, 0, Complex(-0.2, 0.6));
  S.set(0, 1, Complex(0.05, -0.01));
  S.set(1, 1, Complex(1.2, 0.0));
  MatXc acc = MatXc::Zero(2, 2);
  for (int k = 0; k < copies; ++k) {
    const auto N = add_noise(S, 0.1, 1000 + k);
    for (int rx = 0; rx < 2; ++rx)
      for (int tx = 0; tx < 2; ++tx) acc(rx, tx) += N.at(rx, tx);
  }
  acc /= copies;
  for (int rx = 0; rx < 2; ++rx)
    for (int tx = 0; tx < 2; ++tx) {
      const Real sigma = 0.1 * std::abs(S.at(rx, tx));
      const Real bound = 4.0 * sigma / std::sqrt(static_cast<Real>(copies));
      CHECK(std::abs(acc(rx, tx).real() - S.at(rx, tx).real()) <= bound);
      CHECK(std::abs(acc(rx, tx).imag() - S.at(rx, tx).imag()) <= bound);
    }
}

TEST_CASE("empty_reference: cache serves bit-identical results") {
  const Mesh mesh = tiny_chamber();
  PhysicsParams params;
  params.frequency = 1e9;
  params.port_width = 0.02;
  params.port_height = 0.008;
  SolverOptions opts;
  opts.n_subdomains = 2;
  opts.threads = 2;
  auto ctx = ForwardContext::build(mesh, params, opts);
  const auto dir = temp_dir("maxtomo_cache_test");
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  const auto A = empty_reference(ctx, kGelEpsR, dir);
  CHECK(A.provenance == Provenance::EmptyReference);
  // One cache file appeared; the second call must read it back bit-exactly.
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  const auto B = empty_reference(ctx, kGelEpsR, dir);
  for (int rx = 0; rx < A.n; ++rx)
    for (int tx = 0; tx < A.n; ++tx) {
      CHECK(B.at(rx, tx).real() == A.at(rx, tx).real());
      CHECK(B.at(rx, tx).imag() == A.at(rx, tx).imag());
    }

  // Changing the frequency changes the key and forces a recompute.
  auto ctx2 = ctx;
  ctx2.params.frequency = 1.1e9;
  // Rebuild the modes for the new frequency to keep the context coherent.
  ctx2.ports = build_port_modes(mesh, ctx.numbering, ctx2.params);
  (void)empty_reference(ctx2, kGelEpsR, dir);
  files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 2);
}

TEST_CASE("material CSV: round trip and malformed input") {
  const Mesh m = tiny_chamber();
  MaterialField f = MaterialField::uniform(m, Complex(44, -20));
  f.eps_r[3] = Complex(1.0 / 3.0, -2.0 / 7.0);
  const auto path =
      (std::filesystem::temp_directory_path() / "mat.csv").string();
  save_material_csv(f, path);
  const MaterialField g = load_material_csv(m, path);
  for (int v = 0; v < m.n_nodes(); ++v) {
    CHECK(g.eps_r[v].real() == f.eps_r[v].real());
    CHECK(g.eps_r[v].imag() == f.eps_r[v].imag());
  }
  {
    std::ofstream bad(path);
    bad << "wrong,header\n";
  }
  CHECK_THROWS_WITH_AS((void)load_material_csv(m, path),
                       doctest::Contains("header"), Error);
  {
    std::ofstream partial(path);
    partial << "node_id,re,im\n0,44,-20\n";
  }
  CHECK_THROWS_WITH_AS((void)load_material_csv(m, path),
                       doctest::Contains("missing node"), Error);
}

TEST_CASE("vtk: single tet export and minimal-reader round trip") {
  Mesh m;
  m.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  Tet t;
  t.nodes = {0, 1, 2, 3};
  m.tets.push_back(t);
  const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  for (const auto& f : faces) {
    BoundaryTri tri;
    tri.nodes = {f[0], f[1], f[2]};
    tri.tag = 0;
    m.boundary_tris.push_back(tri);
  }
  canonicalize_and_validate(m);

  const auto path =
      (std::filesystem::temp_directory_path() / "one_tet.vtk").string();
  const std::vector<Real> vals{0.125, -3.75, 1.0 / 3.0, 6.02214076e23};
  write_vtk(m, {{"eps_re", vals}}, path);
  const auto d = oracles::read_vtk(path);
  REQUIRE(d.points.size() == 4);
  REQUIRE(d.cells.size() == 1);
  REQUIRE(d.scalars.count("eps_re") == 1);
  for (int i = 0; i < 4; ++i) CHECK(d.scalars.at("eps_re")[i] == vals[i]);

  CHECK_THROWS_WITH_AS(write_vtk(m, {{"bad", {1.0, 2.0}}}, path),
                       doctest::Contains("values"), Error);
}
