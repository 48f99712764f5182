#include "kindex/fem.hpp"
#include "kindex/generators.hpp"
#include "kindex/hodge.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace kindex;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<Mesh::FaceShifts> shifts_of(const Mesh& m) {
  std::vector<Mesh::FaceShifts> s;
  if (!m.has_shifts()) return s;
  for (int f = 0; f < m.num_faces(); ++f) s.push_back({m.halfedge_shift(f, 0), m.halfedge_shift(f, 1), m.halfedge_shift(f, 2)});
  return s;
}

void expect_valid(const GeneratorOutput& g) {
  const Mesh& m = g.mesh;
  EXPECT_TRUE(Mesh::check(m.ambient(), m.positions(), m.faces(), shifts_of(m), m.lattice()).empty()) << g.name;
  EXPECT_EQ(g.geometry.faces.size(), static_cast<std::size_t>(m.num_faces()));
  EXPECT_EQ(g.geometry.vertex_area.size(), m.num_vertices());
}

// Oracle levels reproduce the values they were built from.
void expect_oracle_consistent(const SpectralOracle& o) {
  const Vector v = o.values(20);
  for (int i = 1; i < v.size(); ++i) EXPECT_LE(v[i - 1], v[i]);
  int total = 0;
  for (const auto& [value, mult] : o.levels) {
    EXPECT_GT(mult, 0);
    total += mult;
    if (total >= 20) break;
  }
  EXPECT_EQ(o.count_below(v[0]), 0);
}

}  // namespace

TEST(Generators, CliffordSmall) {
  const GeneratorOutput g = clifford_torus(4, 4);
  EXPECT_EQ(g.mesh.num_vertices(), 16);
  EXPECT_EQ(g.mesh.num_faces(), 32);
  EXPECT_EQ(topology(g.mesh).genus, 1);
  EXPECT_EQ(g.mesh.ambient(), AmbientKind::Sphere3);
  for (const Vec4& p : g.mesh.positions()) EXPECT_NEAR(p.norm(), 1.0, 1e-15);
  EXPECT_FALSE(g.approximate);
  ASSERT_TRUE(g.analytic.has_value());
  expect_valid(g);
}

TEST(Generators, CliffordAreaConverges) {
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {16, 32, 64}) {
    const double err = std::abs(clifford_torus(n, n).geometry.total_area() - 2.0 * pi * pi);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LE(prev / (2.0 * pi * pi), 1e-3);
}

TEST(Generators, CliffordOracle) {
  const GeneratorOutput g = clifford_torus(8, 8);
  ASSERT_TRUE(g.oracle.has_value());
  const Vector v = g.oracle->values(9);
  EXPECT_DOUBLE_EQ(v[0], -4.0);
  for (int i = 1; i < 5; ++i) EXPECT_DOUBLE_EQ(v[i], -2.0);
  for (int i = 5; i < 9; ++i) EXPECT_DOUBLE_EQ(v[i], 0.0);
  EXPECT_EQ(g.oracle->count_below(-1e-9), 5);
  EXPECT_EQ(g.oracle->count_within(1e-9), 4);
  expect_oracle_consistent(*g.oracle);
  // |A|^2 = 2, Ric = 2
  const DiscreteOperators ops = assemble_jacobi_operators(g.mesh, g.geometry, g.ambient);
  EXPECT_LE((ops.potential.array() - 4.0).abs().maxCoeff(), 1e-12);
  EXPECT_LE(g.geometry.max_abs_mean_curvature(), 1e-12);
}

TEST(Generators, EquatorialSphere) {
  const GeneratorOutput g = equatorial_sphere(4);
  expect_valid(g);
  EXPECT_EQ(topology(g.mesh).genus, 0);
  for (const Vec4& p : g.mesh.positions()) {
    EXPECT_EQ(p[3], 0.0);
    EXPECT_NEAR(p.norm(), 1.0, 1e-15);
  }
  const DiscreteOperators ops = assemble_jacobi_operators(g.mesh, g.geometry, g.ambient);
  EXPECT_LE((ops.potential.array() - 2.0).abs().maxCoeff(), 1e-12);
  ASSERT_TRUE(g.oracle.has_value());
  EXPECT_EQ(g.oracle->count_below(-1e-9), 1);
  EXPECT_EQ(g.oracle->count_within(1e-9), 3);
  expect_oracle_consistent(*g.oracle);
  const Spectrum s = jacobi_spectrum(ops, 8, 0.5);
  EXPECT_EQ(s.index, 1);
  EXPECT_EQ(s.nullity, 3);
}

TEST(Generators, FlatTorus) {
  const GeneratorOutput g = flat_torus_surface(Mat3::Identity(), 2, 8);
  expect_valid(g);
  EXPECT_EQ(g.mesh.num_vertices(), 64);
  EXPECT_EQ(topology(g.mesh).genus, 1);
  EXPECT_EQ(g.mesh.ambient(), AmbientKind::FlatTorus3);
  EXPECT_TRUE(g.mesh.lattice().isIdentity());
  for (int f = 0; f < g.mesh.num_faces(); ++f)
    for (int k = 0; k < 3; ++k) EXPECT_LE(g.mesh.halfedge_shift(f, k).cwiseAbs().maxCoeff(), 1);
  const DiscreteOperators ops = assemble_jacobi_operators(g.mesh, g.geometry, g.ambient);
  EXPECT_LE(ops.potential.cwiseAbs().maxCoeff(), 1e-14);
  ASSERT_TRUE(g.oracle.has_value());
  EXPECT_EQ(g.oracle->count_below(-1e-9), 0);
  EXPECT_EQ(g.oracle->count_within(1e-9), 1);
  // the grid spectrum 4 n^2 sin^2(pi k / n), tending to 4 pi^2 k^2
  EXPECT_NEAR(g.oracle->min_nonzero_abs(), 4.0 * 64.0 * std::pow(std::sin(pi / 8.0), 2), 1e-9);
  EXPECT_NEAR(flat_torus_surface(Mat3::Identity(), 2, 256).oracle->min_nonzero_abs() / (4.0 * pi * pi), 1.0, 1e-4);
  const Spectrum s = jacobi_spectrum(ops, 6, 1.0);
  EXPECT_EQ(s.index, 0);
  EXPECT_EQ(s.nullity, 1);
}

TEST(Generators, FlatTorusRejectsNonDiagonalLattice) {
  Mat3 l = Mat3::Identity();
  l(0, 1) = 0.5;
  EXPECT_THROW(flat_torus_surface(l, 2, 8), PreconditionError);
  EXPECT_THROW(flat_torus_surface(Mat3::Identity(), 3, 8), PreconditionError);
  EXPECT_THROW(flat_torus_surface(Mat3::Identity(), 2, 2), PreconditionError);
}

TEST(Generators, RoundSphere) {
  const GeneratorOutput g = round_sphere(1.0, 4);
  expect_valid(g);
  EXPECT_EQ(topology(g.mesh).genus, 0);
  ASSERT_TRUE(g.oracle.has_value());
  ASSERT_TRUE(g.cmc_oracle.has_value());
  EXPECT_EQ(g.oracle->count_below(-1e-9), 1);
  EXPECT_EQ(g.cmc_oracle->count_below(-1e-9), 0);
  EXPECT_EQ(g.cmc_oracle->count_within(1e-9), 3);
  expect_oracle_consistent(*g.cmc_oracle);
  const DiscreteOperators ops = assemble_jacobi_operators(g.mesh, g.geometry, g.ambient);
  const Spectrum c = cmc_spectrum(ops, 6, 0.5);
  EXPECT_EQ(c.index, 0);
  EXPECT_EQ(c.nullity, 3);
  const Spectrum u = jacobi_spectrum(ops, 6, 0.5);
  EXPECT_EQ(u.index, 1);
  for (const Vec4& p : g.mesh.positions()) EXPECT_NEAR(p.norm(), 1.0, 1e-15);
}

TEST(Generators, RoundSphereScaling) {
  const GeneratorOutput a = round_sphere(1.0, 3);
  const GeneratorOutput b = round_sphere(2.0, 3);
  EXPECT_NEAR(b.geometry.total_area(), 4.0 * a.geometry.total_area(), 1e-12);
  const Vector oa = a.oracle->values(10), ob = b.oracle->values(10);
  EXPECT_LE((ob - oa / 4.0).cwiseAbs().maxCoeff(), 1e-12);
  for (const Vec4& p : b.mesh.positions()) EXPECT_NEAR(p.norm(), 2.0, 1e-14);
  EXPECT_THROW(round_sphere(-1.0, 3), PreconditionError);
}

TEST(Generators, SchwarzP) {
  const GeneratorOutput g = schwarz_p(16);
  expect_valid(g);
  const TopologyReport t = topology(g.mesh);
  EXPECT_EQ(t.euler_characteristic, -4);
  EXPECT_EQ(t.genus, 3);
  EXPECT_TRUE(g.approximate);
  EXPECT_FALSE(g.oracle.has_value());
  const Vector& h = g.geometry.mean_curvature;
  const Vector& a = g.geometry.vertex_area;
  EXPECT_GT(g.geometry.max_abs_mean_curvature(), 0.0);
  // odd under the translation by (1/2, 1/2, 1/2), so the mean vanishes
  EXPECT_LE(std::abs(h.dot(a)) / a.sum(), 1e-10);
  const double rms_h = std::sqrt(h.cwiseAbs2().dot(a) / a.sum());
  const double rms_a = std::sqrt(g.geometry.norm_a_sq.dot(a) / a.sum());
  EXPECT_LT(rms_h, 0.2 * rms_a);
  const DecOperators dec = dec_operators(g.mesh, g.geometry);
  EXPECT_EQ(harmonic_basis(g.mesh, g.geometry, dec, 3).size(), 6);
}

TEST(Generators, SchwarzPResolution) {
  try {
    schwarz_p(8);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("resolution ≥ 16 required"), std::string::npos);
  }
}

TEST(Generators, SchwarzPMeanCurvatureMatchesLevelSet) {
  // H = div(grad F / |grad F|) / 2 for F = sum cos 2 pi x_i, signed along the mesh normal.
  const auto exact = [](const Vec3& x, const Vec3& normal) {
    const double t = 2.0 * pi;
    Vec3 grad, hess;
    for (int i = 0; i < 3; ++i) {
      grad[i] = -t * std::sin(t * x[i]);
      hess[i] = -t * t * std::cos(t * x[i]);
    }
    const double n = grad.norm();
    const double h = 0.5 * (hess.sum() / n - grad.cwiseAbs2().dot(hess) / (n * n * n));
    return grad.dot(normal) > 0.0 ? -h : h;
  };
  for (int r : {16, 32}) {
    const GeneratorOutput g = schwarz_p(r);
    const Vector& a = g.geometry.vertex_area;
    double err = 0.0, scale = 0.0;
    for (int v = 0; v < g.mesh.num_vertices(); ++v) {
      const double he = exact(g.mesh.position(v).head<3>(), g.geometry.vertex_normal[v].head<3>());
      err += a[v] * std::pow(g.geometry.mean_curvature[v] - he, 2);
      scale += a[v] * g.geometry.norm_a_sq[v];
    }
    EXPECT_LE(std::sqrt(err / scale), 0.05) << r;
  }
}

TEST(Generators, Deterministic) {
  const GeneratorOutput a = schwarz_p(16), b = schwarz_p(16);
  ASSERT_EQ(a.mesh.num_vertices(), b.mesh.num_vertices());
  EXPECT_EQ(a.mesh.positions(), b.mesh.positions());
  EXPECT_EQ(a.mesh.faces(), b.mesh.faces());
}

TEST(Generators, ArgumentChecks) {
  EXPECT_THROW(clifford_torus(2, 8), PreconditionError);
  EXPECT_THROW(equatorial_sphere(0), PreconditionError);
  EXPECT_THROW(round_sphere(1.0, 0), PreconditionError);
}
