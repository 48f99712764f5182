#pragma once

#include "kindex/ambient.hpp"
#include "kindex/common.hpp"
#include "kindex/eigensolver.hpp"
#include "kindex/geometry.hpp"
#include "kindex/mesh.hpp"

#include <optional>
#include <string>

namespace kindex {

/// Discrete Jacobi form Q(u) = u^T K u - sum_v V(v) M_vv u(v)^2, the second
/// variation of area with lumped mass.
struct DiscreteOperators {
  SparseMatrix stiffness;
  /// Diagonal of the lumped mass matrix.
  Vector mass;
  /// |A|^2 + Ric(N, N) per vertex.
  Vector potential;
  /// Interior angles with negative cotangent weight contribution (obtuse).
  int negative_cotangents = 0;

  int size() const { return static_cast<int>(mass.size()); }
  double quadratic_form(const Vector& u) const;
  /// K - diag(V M), the operator of the quadratic form.
  SparseMatrix jacobi_matrix() const;
};

DiscreteOperators assemble_jacobi_operators(const Mesh& mesh, const SurfaceGeometry& geom,
                                            const AmbientSpace& ambient);

/// Lowest eigenpairs of the pencil (K - diag(V M), M).
struct Spectrum {
  Vector eigenvalues;
  /// M-orthonormal columns.
  Matrix eigenvectors;
  /// ||M^{-1/2} ((K - VM) x - lambda M x)|| per pair.
  Vector residuals;
  double tol_zero = 0.0;
  int index = 0;
  int nullity = 0;
  /// Distance from the band [-tol_zero, tol_zero] to the nearest eigenvalue outside it.
  double certificate_gap = 0.0;
  /// Distance from the nearest eigenvalue inside the band to the band edge.
  double null_margin = 0.0;
  /// The largest computed eigenvalue is below tol_zero: counts may be truncated.
  bool truncated = false;
  /// Restricted to functions with zero mean.
  bool mean_zero = false;
  std::string method;
  /// Inf-norm of the symmetric standard-form operator; residual scale.
  double operator_norm = 0.0;

  int count() const { return static_cast<int>(eigenvalues.size()); }
};

struct SpectrumOptions {
  /// Problems up to this size use the dense solver.
  int dense_limit = 6000;
  IterativeOptions iterative;
};

Spectrum jacobi_spectrum(const DiscreteOperators& ops, int m, double tol_zero, const SpectrumOptions& options = {});

/// Spectrum on {u : sum_v M_vv u(v) = 0}, by deflating the constants.
Spectrum cmc_spectrum(const DiscreteOperators& ops, int m, double tol_zero, const SpectrumOptions& options = {});

struct IndexNullity {
  int index = 0;
  int nullity = 0;
  double certificate_gap = 0.0;
};

/// Throws PreconditionError on a truncated spectrum.
IndexNullity index_nullity(const Spectrum& spectrum);

/// Q(u) / (u^T M u); throws PreconditionError for u = 0.
double rayleigh_quotient(const DiscreteOperators& ops, const Vector& u);

/// 1e-3 * (max |V| + mean diagonal of M^{-1} K).
double default_tol_zero(const DiscreteOperators& ops);

}  // namespace kindex
