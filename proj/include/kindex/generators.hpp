#pragma once

#include "kindex/ambient.hpp"
#include "kindex/common.hpp"
#include "kindex/geometry.hpp"
#include "kindex/mesh.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kindex {

/// Closed-form spectrum of the Jacobi pencil as (eigenvalue, multiplicity)
/// levels in increasing order.
struct SpectralOracle {
  std::vector<std::pair<double, int>> levels;

  /// The first m eigenvalues with multiplicity.
  Vector values(int m) const;
  int count_below(double threshold) const;
  int count_within(double tol) const;
  /// Smallest nonzero |lambda| (levels with |lambda| <= 1e-12 count as zero).
  double min_nonzero_abs() const;
};

struct GeneratorOutput {
  std::string name;
  Mesh mesh;
  AmbientSpace ambient;
  std::optional<AnalyticSurface> analytic;
  SurfaceGeometry geometry;
  std::optional<SpectralOracle> oracle;
  /// Oracle for functions with zero mean.
  std::optional<SpectralOracle> cmc_oracle;
  /// The surface only approximates a minimal surface.
  bool approximate = false;
};

/// (cos u, sin u, cos v, sin v) / sqrt 2 on an nu x nv grid in S^3. nu, nv >= 3.
GeneratorOutput clifford_torus(int nu, int nv);

/// Icosphere in the hyperplane x4 = 0 of S^3. subdiv >= 1.
GeneratorOutput equatorial_sphere(int subdiv);

/// Coordinate 2-torus orthogonal to `normal_axis` in R^3 / lattice Z^3,
/// n x n grid. The lattice must be diagonal; n >= 3.
GeneratorOutput flat_torus_surface(const Mat3& lattice, int normal_axis, int n);

/// Icosphere of radius r in R^3, outward normal.
GeneratorOutput round_sphere(double r, int subdiv);

/// Level set cos 2 pi x + cos 2 pi y + cos 2 pi z = 0 in the unit 3-torus
/// (marching tetrahedra on a resolution^3 grid). resolution >= 16.
GeneratorOutput schwarz_p(int resolution);

/// Icosahedron subdivided `subdiv` times, projected to the unit sphere in R^3.
void icosphere(int subdiv, std::vector<Vec3>& vertices, std::vector<Mesh::Face>& faces);

}  // namespace kindex
