#include "kindex/generators.hpp"
#include "kindex/killing_tests.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace kindex;

namespace {

struct Pipeline {
  GeneratorOutput g;
  int genus;
  DecOperators dec;
  DiscreteOperators ops;
  HarmonicBasis basis;

  explicit Pipeline(GeneratorOutput out)
      : g(std::move(out)),
        genus(topology(g.mesh).genus),
        dec(dec_operators(g.mesh, g.geometry)),
        ops(assemble_jacobi_operators(g.mesh, g.geometry, g.ambient)),
        basis(harmonic_basis(g.mesh, g.geometry, dec, genus)) {}

  KillingTestSet tests(const FaceField& xi) const { return test_functions(g.mesh, g.ambient, g.geometry, ops, xi); }
  Lemma1Residuals lemma1(int a) const { return lemma1_residuals(g.mesh, g.ambient, g.geometry, dec, basis.fields[a]); }
  Lemma2Result lemma2(int a, const Lemma2Options& o = {}) const {
    return lemma2_residual(g.mesh, g.ambient, g.geometry, ops, basis, Vector::Unit(basis.size(), a), o);
  }
};

FaceField constant_field(const SurfaceGeometry& geom, const Vec4& v) {
  FaceField xi;
  for (const auto& fr : geom.faces) xi.push_back(fr.local(v));
  return xi;
}

double max_lemma1(const Lemma1Residuals& r) {
  return std::max({r.symmetric_derivative, r.gradient_pairing, r.divergence});
}

}  // namespace

TEST(KillingTests, Ranks) {
  const int theorem[] = {0, 1, 1, 1, 2, 2, 2, 3, 3, 3};
  const int corollary[] = {-1, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  for (int g = 0; g < 10; ++g) {
    EXPECT_EQ(theorem_rank(g), theorem[g]) << g;
    EXPECT_EQ(corollary_rank(g), corollary[g]) << g;
    // the rank argument: 2g > 6(k - 1) always
    EXPECT_GT(2 * g, 6 * (theorem_rank(g) - 1));
  }
}

TEST(KillingTests, FlatTorusTestFunctions) {
  const Pipeline p(flat_torus_surface(Mat3::Identity(), 2, 8));
  const KillingTestSet t = p.tests(constant_field(p.g.geometry, Vec4::Unit(0)));
  const int n = p.g.mesh.num_vertices();
  EXPECT_LE((t.w[0] - Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(t.w[1].cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(t.w[2].cwiseAbs().maxCoeff(), 1e-14);
  // *e1 = +-e2 depending on orientation
  EXPECT_LE(t.wbar[0].cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((t.wbar[1].cwiseAbs() - Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(t.wbar[2].cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(std::abs(t.wbar[1].maxCoeff() - t.wbar[1].minCoeff()), 1e-14);
}

TEST(KillingTests, PointwiseFrameIdentity) {
  for (const GeneratorOutput& g : {clifford_torus(32, 32), schwarz_p(16)}) {
    const Pipeline p(g);
    for (int a = 0; a < p.basis.size(); ++a) {
      const KillingTestSet t = p.tests(p.basis.fields[a]);
      for (int f = 0; f < p.g.mesh.num_faces(); ++f) {
        const double lhs = t.face_w.row(f).squaredNorm() + t.face_wbar.row(f).squaredNorm();
        EXPECT_NEAR(lhs, 2.0 * t.xi[f].squaredNorm(), 1e-9);
      }
    }
  }
}

TEST(KillingTests, Linearity) {
  const Pipeline p(schwarz_p(16));
  const double c1 = 1.7, c2 = -0.4;
  FaceField mix = p.basis.fields[0];
  for (std::size_t f = 0; f < mix.size(); ++f) mix[f] = c1 * p.basis.fields[0][f] + c2 * p.basis.fields[3][f];
  const KillingTestSet a = p.tests(p.basis.fields[0]);
  const KillingTestSet b = p.tests(p.basis.fields[3]);
  const KillingTestSet m = p.tests(mix);
  for (int i = 0; i < 6; ++i) {
    const Vector expected = c1 * a.function(i) + c2 * b.function(i);
    EXPECT_LE((m.function(i) - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_LE((m.face_w - (c1 * a.face_w + c2 * b.face_w)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KillingTests, ScalingQuadratic) {
  const Pipeline p(clifford_torus(24, 24));
  FaceField scaled = p.basis.fields[1];
  for (auto& v : scaled) v *= -3.0;
  const double q = p.tests(p.basis.fields[1]).q_sum();
  const double qs = p.tests(scaled).q_sum();
  EXPECT_NEAR(qs, 9.0 * q, 1e-10 * std::abs(q));
  EXPECT_EQ(std::signbit(q), std::signbit(qs));
}

TEST(KillingTests, FrameIdentityFlatTorusVanishes) {
  const Pipeline p(flat_torus_surface(Mat3::Identity(), 2, 16));
  for (int a = 0; a < 2; ++a) EXPECT_LE(max_lemma1(p.lemma1(a)), 1e-10);
}

TEST(KillingTests, FrameIdentityCliffordConverges) {
  const Pipeline coarse(clifford_torus(32, 32));
  const Pipeline fine(clifford_torus(64, 64));
  for (int a = 0; a < 2; ++a) {
    const Lemma1Residuals c = coarse.lemma1(a);
    const Lemma1Residuals f = fine.lemma1(a);
    const double pairs[3][2] = {{c.symmetric_derivative, f.symmetric_derivative},
                                {c.gradient_pairing, f.gradient_pairing},
                                {c.divergence, f.divergence}};
    for (const auto& r : pairs) {
      // residuals at rounding level on both meshes are already converged
      if (r[0] <= 1e-12 && r[1] <= 1e-12) continue;
      EXPECT_GE(std::log2(r[0] / r[1]), 1.0);
    }
  }
}

TEST(KillingTests, FrameIdentityDivergenceOnRoundSphere) {
  // The -2 H g_i term with H != 0; a constant tangent field stands in for xi.
  double prev = 0.0;
  for (int s : {3, 4, 5}) {
    const GeneratorOutput g = round_sphere(1.0, s);
    const DecOperators dec = dec_operators(g.mesh, g.geometry);
    const Lemma1Residuals r =
        lemma1_residuals(g.mesh, g.ambient, g.geometry, dec, FaceField(g.mesh.num_faces(), Vec2::Zero()));
    if (s > 3) EXPECT_LT(r.divergence, prev);
    prev = r.divergence;
  }
  EXPECT_LE(prev, 0.05);
}

TEST(KillingTests, IntegralIdentityFlatTorus) {
  const Pipeline p(flat_torus_surface(Mat3::Identity(), 2, 16));
  for (int a = 0; a < 2; ++a) {
    const Lemma2Result r = p.lemma2(a);
    EXPECT_LE(r.rel_residual, 1e-8);
    EXPECT_EQ(r.rhs_q, 0.0);
    EXPECT_EQ(r.rhs_energy, 0.0);
  }
}

TEST(KillingTests, IntegralIdentityClifford) {
  const Pipeline p(clifford_torus(64, 64));
  for (int a = 0; a < 2; ++a) {
    const Lemma2Result r = p.lemma2(a);
    EXPECT_LE(r.rel_residual, 0.05);
    // Ric = 2, H = 0: rhs = -4 int |xi|^2
    EXPECT_NEAR(r.rhs_q, -4.0 * r.xi_norm_sq, 1e-12 * r.xi_norm_sq);
    EXPECT_NEAR(r.lhs_q / r.rhs_q, 1.0, 0.05);
  }
}

TEST(KillingTests, IntegralIdentityUnitFieldOnClifford) {
  // A unit field: sum Q = -4 Area = -8 pi^2.
  const Pipeline p(clifford_torus(64, 64));
  const Vector c = Vector::Unit(2, 0);
  const FaceField xi = p.basis.combine_field(c);
  double norm_sq = 0.0, area = 0.0;
  for (int f = 0; f < p.g.mesh.num_faces(); ++f) {
    norm_sq += p.g.geometry.faces[f].area * xi[f].squaredNorm();
    area += p.g.geometry.faces[f].area;
  }
  const double q_unit = p.tests(xi).q_sum() * area / norm_sq;
  EXPECT_NEAR(q_unit / (-8.0 * std::numbers::pi * std::numbers::pi), 1.0, 0.05);
}

TEST(KillingTests, IntegralIdentityRejections) {
  const Pipeline sphere(round_sphere(1.0, 2));
  try {
    lemma2_residual(sphere.g.mesh, sphere.g.ambient, sphere.g.geometry, sphere.ops, sphere.basis, Vector());
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("empty harmonic basis"), std::string::npos);
  }

  const Pipeline sp(schwarz_p(16));
  EXPECT_THROW(sp.lemma2(0), PreconditionError);
  Lemma2Options relaxed;
  relaxed.allow_approximate = true;
  EXPECT_NO_THROW(sp.lemma2(0, relaxed));

  HarmonicBasis broken = sp.basis;
  broken.harmonic_tol = 1e-30;
  Lemma2Options o;
  o.allow_approximate = true;
  EXPECT_THROW(lemma2_residual(sp.g.mesh, sp.g.ambient, sp.g.geometry, sp.ops, broken, Vector::Unit(6, 0), o),
               PreconditionError);
}

TEST(KillingTests, IntegralIdentityConvergesOnClifford) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const Pipeline p(clifford_torus(n, n));
    double r = 0.0;
    for (int a = 0; a < 2; ++a) r = std::max(r, p.lemma2(a).rel_residual);
    if (n > 32) EXPECT_GE(std::log2(prev / r), 1.0) << n;
    prev = r;
  }
}

TEST(KillingTests, GenusBoundCertificateClifford) {
  const Pipeline p(clifford_torus(64, 64));
  const Spectrum s = jacobi_spectrum(p.ops, 20, 0.3);
  const Certificate c = theorem_certificate(p.g.mesh, p.g.ambient, p.g.geometry, p.ops, s, p.basis, 1);
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.constraints.rows(), 0);
  EXPECT_LT(c.q_sum, 0.0);
  EXPECT_EQ(c.verdict, Verdict::BoundWitnessed);
  EXPECT_GE(s.index + s.nullity, c.k);
  EXPECT_EQ(s.index + s.nullity, 9);
}

TEST(KillingTests, GenusBoundCertificateFlatTorus) {
  const Pipeline p(flat_torus_surface(Mat3::Identity(), 2, 16));
  const Spectrum s = jacobi_spectrum(p.ops, 6, 1.0);
  const Certificate c = theorem_certificate(p.g.mesh, p.g.ambient, p.g.geometry, p.ops, s, p.basis, 1);
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_LE(std::abs(c.q_sum), c.slack);
  EXPECT_EQ(c.verdict, Verdict::BoundWitnessed);
  EXPECT_EQ(s.index + s.nullity, 1);
}

TEST(KillingTests, GenusBoundCertificateSchwarzP) {
  const Pipeline p(schwarz_p(16));
  CertificateOptions o;
  EXPECT_THROW(theorem_certificate(p.g.mesh, p.g.ambient, p.g.geometry, p.ops, Spectrum{}, p.basis, 3, o),
               PreconditionError);
  o.allow_approximate = true;
  const Certificate c = theorem_certificate(p.g.mesh, p.g.ambient, p.g.geometry, p.ops, Spectrum{}, p.basis, 3, o);
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.verdict, Verdict::BoundWitnessed);

  o.force_k = 2;
  const Spectrum s = jacobi_spectrum(p.ops, 1, 1.0);
  const Certificate forced = theorem_certificate(p.g.mesh, p.g.ambient, p.g.geometry, p.ops, s, p.basis, 3, o);
  EXPECT_EQ(forced.constraints.rows(), 6);
  EXPECT_EQ(forced.constraints.cols(), 6);
  EXPECT_EQ(forced.rank, 6);
  EXPECT_EQ(forced.verdict, Verdict::ConstraintsFullRank);
}

TEST(KillingTests, KernelVectorSatisfiesConstraints) {
  // k forced to 2: 6 moment rows against the first eigenfunction on 6 unknowns.
  const Pipeline p(schwarz_p(16));
  CertificateOptions o;
  o.allow_approximate = true;
  o.force_k = 2;
  const Spectrum s = jacobi_spectrum(p.ops, 1, 1.0);
  Certificate c = theorem_certificate(p.g.mesh, p.g.ambient, p.g.geometry, p.ops, s, p.basis, 3, o);
  ASSERT_EQ(c.singular_values.size(), 6);
  for (int i = 1; i < 6; ++i) EXPECT_LE(c.singular_values[i], c.singular_values[i - 1]);
  // drop one row so a kernel exists, and check it directly
  const Matrix reduced = c.constraints.topRows(5);
  Eigen::JacobiSVD<Matrix> svd(reduced, Eigen::ComputeFullV);
  const Vector kernel = svd.matrixV().col(5);
  EXPECT_LE((reduced * kernel).norm(), 1e-10 * svd.singularValues()[0]);
}

TEST(KillingTests, CmcCertificates) {
  const Pipeline sphere(round_sphere(1.0, 3));
  const Spectrum cs = cmc_spectrum(sphere.ops, 6, 0.5);
  const Certificate c = cmc_certificate(sphere.g.mesh, sphere.g.ambient, sphere.g.geometry, sphere.ops, cs,
                                        sphere.basis, 0);
  EXPECT_EQ(c.k, -1);
  EXPECT_EQ(c.verdict, Verdict::BoundWitnessed);
  EXPECT_EQ(cs.index, 0);

  const Pipeline clifford(clifford_torus(32, 32));
  const Spectrum ccs = cmc_spectrum(clifford.ops, 12, 0.3);
  const Certificate trivial = cmc_certificate(clifford.g.mesh, clifford.g.ambient, clifford.g.geometry,
                                              clifford.ops, ccs, clifford.basis, 1);
  EXPECT_EQ(trivial.k, 0);
  EXPECT_EQ(trivial.verdict, Verdict::BoundWitnessed);

  CertificateOptions o;
  o.force_k = 1;
  const Certificate forced = cmc_certificate(clifford.g.mesh, clifford.g.ambient, clifford.g.geometry,
                                             clifford.ops, ccs, clifford.basis, 1, o);
  EXPECT_EQ(forced.constraints.rows(), 6);
  EXPECT_EQ(forced.constraints.cols(), 2);
  EXPECT_EQ(forced.verdict, Verdict::ConstraintsFullRank);
}

TEST(KillingTests, GenusBoundRejectsNonMinimal) {
  const Pipeline sphere(round_sphere(1.0, 2));
  try {
    theorem_certificate(sphere.g.mesh, sphere.g.ambient, sphere.g.geometry, sphere.ops, Spectrum{}, sphere.basis, 0);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("surface is not minimal"), std::string::npos);
  }
}

TEST(KillingTests, GenusZeroBoundIsTrivial) {
  const Pipeline eq(equatorial_sphere(2));
  const Certificate c = theorem_certificate(eq.g.mesh, eq.g.ambient, eq.g.geometry, eq.ops, Spectrum{}, eq.basis, 0);
  EXPECT_EQ(c.k, 0);
  EXPECT_EQ(c.verdict, Verdict::BoundWitnessed);
  EXPECT_EQ(c.note, "empty harmonic basis, bound trivial (⌈0/3⌉ = 0)");
}

TEST(KillingTests, VerdictNames) {
  EXPECT_EQ(to_string(Verdict::BoundWitnessed), "bound_witnessed");
  EXPECT_EQ(to_string(Verdict::ResolutionInsufficient), "resolution_insufficient");
  EXPECT_EQ(to_string(Verdict::ConstraintsFullRank), "constraints_full_rank");
}
