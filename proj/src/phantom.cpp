// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Geometry>

namespace maxtomo {

Eigen::Matrix3d Ellipsoid::rotation() const {
  return (Eigen::AngleAxisd(euler.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(euler.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(euler.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

bool Ellipsoid::contains(const Vec3& p) const {
  const Vec3 local = rotation().transpose() * (p - center);
  Real acc = 0;
  for (int k = 0; k < 3; ++k) {
    const Real r = local[k] / semi_axes[k];
    acc += r * r;
  }
  return acc <= 1.0;
}

namespace {

void check_dissipative(Complex eps, const char* what) {
  if (eps.imag() > 0)
    fail_config(std::string(what) +
                " must be dissipative (Im eps_r <= 0), got Im = " +
                std::to_string(eps.imag()));
}

void check_ellipsoid(const Ellipsoid& e, const char* what) {
  if (e.semi_axes.minCoeff() <= 0)
    fail_config(std::string(what) + " ellipsoid has a zero semi-axis");
}

std::vector<char> imaging_nodes(const Mesh& mesh) {
  std::vector<char> active(mesh.n_nodes(), 0);
  for (const auto& t : mesh.tets)
    if (t.region == 0)
      for (int v : t.nodes) active[v] = 1;
  return active;
}

}  // namespace

MaterialField build_phantom(const PhantomSpec& spec, const Mesh& mesh) {
  check_dissipative(spec.background, "background");
  MaterialField m = MaterialField::uniform(mesh, spec.background);

  if (spec.head || spec.head_region_tag >= 0) check_dissipative(spec.head_eps, "head");
  if (spec.head) {
    check_ellipsoid(*spec.head, "head");
    int inside = 0;
    for (int v = 0; v < mesh.n_nodes(); ++v)
      if (spec.head->contains(mesh.nodes[v])) {
        m.eps_r[v] = spec.head_eps;
        ++inside;
      }
    if (inside == 0) fail_config("head ellipsoid lies outside the mesh");
  } else if (spec.head_region_tag >= 0) {
    for (const auto& t : mesh.tets)
      if (t.region == spec.head_region_tag)
        for (int v : t.nodes) m.eps_r[v] = spec.head_eps;
  }

  if (spec.stroke) {
    check_ellipsoid(*spec.stroke, "stroke");
    if (spec.rule == StrokeRule::Absolute)
      check_dissipative(spec.stroke_value, "stroke");
    check_dissipative(spec.blood, "blood");
    const auto active = imaging_nodes(mesh);
    int inside = 0;
    for (int v = 0; v < mesh.n_nodes(); ++v) {
      if (!spec.stroke->contains(mesh.nodes[v])) continue;
      if (!active[v])
        fail_config("stroke ellipsoid leaves the imaging region at node " +
                    std::to_string(v));
      m.eps_r[v] = spec.rule == StrokeRule::Absolute
                       ? spec.stroke_value
                       : (m.eps_r[v] + spec.blood) / 2.0;
      ++inside;
    }
    if (inside == 0) fail_config("stroke ellipsoid lies outside the mesh");
  }
  return m;
}

ScatteringMatrix add_noise(const ScatteringMatrix& S, Real level,
                           std::uint64_t seed) {
  if (level < 0) fail_config("noise level must be >= 0");
  ScatteringMatrix out = S;
  out.provenance = Provenance::SyntheticNoisy;

  // Box-Muller over a seeded 64-bit generator keeps the draws reproducible
  // across platforms.
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return 1.0 - (rng() >> 11) * (1.0 / 9007199254740992.0);  // (0, 1]
  };
  for (int tx = 0; tx < S.n; ++tx)
    for (int rx = 0; rx < S.n; ++rx) {
      if (!S.valid(rx, tx)) continue;
      const Real u1 = uniform(), u2 = uniform();
      const Real r = std::sqrt(-2.0 * std::log(u1));
      const Real z_re = r * std::cos(2.0 * pi * u2);
      const Real z_im = r * std::sin(2.0 * pi * u2);
      const Real sigma = level * std::abs(S.at(rx, tx));
      out.set(rx, tx, S.at(rx, tx) + Complex(sigma * z_re, sigma * z_im));
    }
  return out;
}

std::uint64_t mesh_hash(const Mesh& mesh) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix_bytes = [&h](const void* p, size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : mesh.nodes) {
    const double c[3] = {p.x(), p.y(), p.z()};
    mix_bytes(c, sizeof(c));
  }
  for (const auto& t : mesh.tets) {
    mix_bytes(t.nodes.data(), sizeof(t.nodes));
    mix_bytes(&t.region, sizeof(t.region));
  }
  for (const auto& b : mesh.boundary_tris) {
    mix_bytes(b.nodes.data(), sizeof(b.nodes));
    mix_bytes(&b.tag, sizeof(b.tag));
  }
  return h;
}

ScatteringMatrix empty_reference(const ForwardContext& ctx, Complex gel_eps,
                                 const std::string& cache_dir) {
  std::string cache_path;
  if (!cache_dir.empty()) {
    std::uint64_t h = mesh_hash(*ctx.mesh);
    auto mix = [&h](double v) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(gel_eps.real());
    mix(gel_eps.imag());
    mix(ctx.params.frequency);
    char name[64];
    std::snprintf(name, sizeof(name), "empty_%016llx.csv",
                  static_cast<unsigned long long>(h));
    cache_path = cache_dir + "/" + name;
    if (std::filesystem::exists(cache_path)) {
      ScatteringMatrix S = load_smatrix(cache_path);
      S.provenance = Provenance::EmptyReference;
      S.frequency = ctx.params.frequency;
      return S;
    }
  }
  const auto res =
      forward_solve(ctx, MaterialField::uniform(*ctx.mesh, gel_eps));
  ScatteringMatrix S = res.S;
  S.provenance = Provenance::EmptyReference;
  if (!cache_path.empty()) {
    std::filesystem::create_directories(cache_dir);
    save_smatrix(S, cache_path);
  }
  return S;
}

void write_vtk(const Mesh& mesh,
               const std::map<std::string, std::vector<Real>>& fields,
               const std::string& path) {
  for (const auto& [name, values] : fields)
    if (static_cast<int>(values.size()) != mesh.n_nodes())
      fail_config("VTK array '" + name + "' has " +
                  std::to_string(values.size()) + " values, mesh has " +
                  std::to_string(mesh.n_nodes()) + " nodes");
  std::ofstream out(path);
  if (!out) fail_config("cannot open '" + path + "' for writing");
  char buf[160];
  out << "# vtk DataFile Version 3.0\nmaxtomo field export\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(),
                  p.z());
    out << buf;
  }
  out << "CELLS " << mesh.n_tets() << ' ' << mesh.n_tets() * 5 << '\n';
  for (const auto& t : mesh.tets)
    out << "4 " << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << ' '
        << t.nodes[3] << '\n';
  out << "CELL_TYPES " << mesh.n_tets() << '\n';
  for (int i = 0; i < mesh.n_tets(); ++i) out << "10\n";
  out << "POINT_DATA " << mesh.n_nodes() << '\n';
  for (const auto& [name, values] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Real v : values) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", v);
      out << buf;
    }
  }
  if (!out) fail_config("write failed for '" + path + "'");
}

}  // namespace maxtomo
