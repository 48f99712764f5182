#pragma once

#include "kindex/common.hpp"
#include "kindex/eigensolver.hpp"
#include "kindex/geometry.hpp"
#include "kindex/mesh.hpp"

#include <filesystem>
#include <vector>

namespace kindex {

/// Incidence derivatives and diagonal Hodge stars. Edges are oriented v0 -> v1.
struct DecOperators {
  /// E x V.
  SparseMatrix d0;
  /// F x E.
  SparseMatrix d1;
  /// Lumped vertex areas.
  Vector star0;
  /// Cotangent weights (cot a + cot b) / 2; negative across obtuse pairs.
  Vector star1;
  /// Inverse face areas.
  Vector star2;
};

DecOperators dec_operators(const Mesh& mesh, const SurfaceGeometry& geom);

/// Star1-orthonormal basis of discrete harmonic 1-forms with their
/// per-face vector proxies.
struct HarmonicBasis {
  /// E x 2g, one form per column.
  Matrix forms;
  /// Whitney proxy of each form.
  std::vector<FaceField> fields;
  /// Lowest 2g + 1 eigenvalues of the symmetrized 1-form Laplacian.
  Vector laplacian_eigenvalues;
  /// lambda_{2g+1} / lambda_{2g}; infinite when the kernel is exact to rounding.
  double gap_ratio = 0.0;
  /// Relative ||d w|| and ||delta w|| per form.
  std::vector<double> closed_residuals;
  std::vector<double> coclosed_residuals;
  double harmonic_tol = 0.0;

  int size() const { return static_cast<int>(forms.cols()); }
  bool empty() const { return size() == 0; }
  double max_residual() const;
  bool residuals_ok() const { return max_residual() <= harmonic_tol; }

  Vector combine_form(const Vector& coefficients) const;
  FaceField combine_field(const Vector& coefficients) const;
};

struct HarmonicOptions {
  double harmonic_tol = 1e-8;
  /// Required ratio between the first non-harmonic and the last harmonic eigenvalue.
  double min_gap_ratio = 10.0;
  IterativeOptions iterative;
};

/// Throws ResolutionError ("harmonic basis not resolved") when the spectral
/// gap after the 2g-th eigenvalue is below `min_gap_ratio`.
HarmonicBasis harmonic_basis(const Mesh& mesh, const SurfaceGeometry& geom, const DecOperators& dec, int genus,
                             const HarmonicOptions& options = {});

/// Relative closedness and co-closedness residuals of an edge 1-form.
double closed_residual(const DecOperators& dec, const Vector& form);
double coclosed_residual(const DecOperators& dec, const Vector& form);

/// Per-face constant field whose edge pairings match the form (least squares).
FaceField whitney_vector(const Mesh& mesh, const SurfaceGeometry& geom, const Vector& form);

/// +90 degree rotation in each face frame: (a, b) -> (-b, a).
FaceField rotate90(const SurfaceGeometry& geom, const FaceField& field);

void write_harmonic_edges_csv(const Mesh& mesh, const HarmonicBasis& basis, const std::filesystem::path& path);
void write_harmonic_faces_csv(const SurfaceGeometry& geom, const HarmonicBasis& basis,
                              const std::filesystem::path& path);

}  // namespace kindex
