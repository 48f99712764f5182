#include "kindex/fem.hpp"

#include "kindex/eigensolver.hpp"

#include <cmath>
#include <limits>

namespace kindex {

double DiscreteOperators::quadratic_form(const Vector& u) const {
  return u.dot(stiffness * u) - (potential.array() * mass.array() * u.array().square()).sum();
}

SparseMatrix DiscreteOperators::jacobi_matrix() const {
  SparseMatrix diag(size(), size());
  diag.reserve(Eigen::VectorXi::Constant(size(), 1));
  for (int i = 0; i < size(); ++i) diag.insert(i, i) = potential[i] * mass[i];
  return stiffness - diag;
}

DiscreteOperators assemble_jacobi_operators(const Mesh& mesh, const SurfaceGeometry& geom,
                                            const AmbientSpace& ambient) {
  const int nv = mesh.num_vertices();
  DiscreteOperators ops;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_faces()) * 12);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& fr = geom.faces[f];
    const auto& fc = mesh.face(f);
    for (int k = 0; k < 3; ++k) {
      const Vec4 a = fr.corners[(k + 1) % 3] - fr.corners[k];
      const Vec4 b = fr.corners[(k + 2) % 3] - fr.corners[k];
      const double cot = a.dot(b) / (2.0 * fr.area);
      if (cot < 0.0) ++ops.negative_cotangents;
      const double w = 0.5 * cot;
      const int i = fc[(k + 1) % 3];
      const int j = fc[(k + 2) % 3];
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
    }
  }
  ops.stiffness.resize(nv, nv);
  ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  ops.mass = geom.vertex_area;
  ops.potential.resize(nv);
  for (int v = 0; v < nv; ++v) ops.potential[v] = geom.norm_a_sq[v] + ricci_normal(ambient, geom.vertex_normal[v]);
  return ops;
}

namespace {

void count(Spectrum& s) {
  s.index = 0;
  s.nullity = 0;
  s.certificate_gap = std::numeric_limits<double>::infinity();
  s.null_margin = s.tol_zero;
  for (int k = 0; k < s.count(); ++k) {
    const double l = s.eigenvalues[k];
    if (l < -s.tol_zero) {
      ++s.index;
      s.certificate_gap = std::min(s.certificate_gap, -s.tol_zero - l);
    } else if (l > s.tol_zero) {
      s.certificate_gap = std::min(s.certificate_gap, l - s.tol_zero);
    } else {
      ++s.nullity;
      s.null_margin = std::min(s.null_margin, s.tol_zero - std::abs(l));
    }
  }
  s.truncated = s.count() == 0 || s.eigenvalues[s.count() - 1] < s.tol_zero;
}

Spectrum solve(const DiscreteOperators& ops, int m, double tol_zero, bool mean_zero, const SpectrumOptions& options) {
  if (!(tol_zero > 0.0)) throw PreconditionError("tol_zero must be positive");
  const int n = ops.size();
  if (m < 1 || m > (mean_zero ? n - 1 : n)) throw PreconditionError("eigenpair count out of range");

  const Vector inv_sqrt_mass = ops.mass.cwiseSqrt().cwiseInverse();
  const SparseMatrix standard = inv_sqrt_mass.asDiagonal() * ops.jacobi_matrix() * inv_sqrt_mass.asDiagonal();

  Vector constant;
  if (mean_zero) constant = ops.mass.cwiseSqrt().normalized();
  const Vector* deflate = mean_zero ? &constant : nullptr;

  EigenPairs pairs;
  if (n <= options.dense_limit) {
    pairs = lowest_dense(Matrix(standard), m, deflate);
  } else {
    // K is positive semidefinite, so the spectrum lies above -max V.
    const double vmax = ops.potential.maxCoeff();
    const double shift = -vmax - (0.1 + 0.05 * ops.potential.cwiseAbs().maxCoeff());
    pairs = lowest_sparse(standard, m, shift, deflate, options.iterative);
  }

  Spectrum s;
  s.eigenvalues = pairs.values;
  s.eigenvectors = inv_sqrt_mass.asDiagonal() * pairs.vectors;
  s.residuals = pairs.residuals;
  s.tol_zero = tol_zero;
  s.mean_zero = mean_zero;
  s.method = pairs.method;
  s.operator_norm = infinity_norm(standard);
  count(s);
  return s;
}

}  // namespace

Spectrum jacobi_spectrum(const DiscreteOperators& ops, int m, double tol_zero, const SpectrumOptions& options) {
  return solve(ops, m, tol_zero, false, options);
}

Spectrum cmc_spectrum(const DiscreteOperators& ops, int m, double tol_zero, const SpectrumOptions& options) {
  return solve(ops, m, tol_zero, true, options);
}

IndexNullity index_nullity(const Spectrum& spectrum) {
  if (spectrum.truncated)
    throw PreconditionError("spectrum is truncated: request more eigenpairs");
  return {spectrum.index, spectrum.nullity, spectrum.certificate_gap};
}

double rayleigh_quotient(const DiscreteOperators& ops, const Vector& u) {
  const double denom = (ops.mass.array() * u.array().square()).sum();
  if (!(denom > 0.0)) throw PreconditionError("rayleigh_quotient of the zero function");
  return ops.quadratic_form(u) / denom;
}

double default_tol_zero(const DiscreteOperators& ops) {
  double diag = 0.0;
  for (int i = 0; i < ops.size(); ++i) diag += ops.stiffness.coeff(i, i) / ops.mass[i];
  diag /= ops.size();
  return 1e-3 * (ops.potential.cwiseAbs().maxCoeff() + diag);
}

}  // namespace kindex
