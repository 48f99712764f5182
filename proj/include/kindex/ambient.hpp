#pragma once

#include "kindex/common.hpp"
#include "kindex/mesh.hpp"

#include <array>

namespace kindex {

/// A 3-manifold with a global orthonormal Killing frame.
class AmbientSpace {
 public:
  static AmbientSpace euclidean() { return AmbientSpace(AmbientKind::Euclidean3, Mat3::Identity()); }
  static AmbientSpace sphere() { return AmbientSpace(AmbientKind::Sphere3, Mat3::Identity()); }
  /// Columns of `lattice` generate the translations; throws on a singular lattice.
  static AmbientSpace flat_torus(const Mat3& lattice);
  /// The ambient a mesh's coordinates live in (lattice taken from the mesh).
  static AmbientSpace of(const Mesh& mesh);

  AmbientKind kind() const { return kind_; }
  const Mat3& lattice() const { return lattice_; }

  /// Injectivity radius: half the shortest lattice vector on the torus,
  /// pi on the unit sphere, infinite in Euclidean space.
  double injectivity_radius() const;

 private:
  AmbientSpace(AmbientKind kind, const Mat3& lattice) : kind_(kind), lattice_(lattice) {}

  AmbientKind kind_;
  Mat3 lattice_;
};

using Frame = std::array<Vec4, 3>;

/// Hamilton product with components ordered (1, i, j, k).
Vec4 quaternion_multiply(const Vec4& p, const Vec4& q);

/// Standard frame in R^3 and T^3; on S^3 the left-invariant frame
/// {p i, p j, p k}. Throws PreconditionError off the unit sphere.
Frame killing_frame(const AmbientSpace& ambient, const Vec4& p);

/// Ric(N, N): 2 on the unit 3-sphere, 0 on the flat spaces.
double ricci_normal(const AmbientSpace& ambient, const Vec4& normal);

struct FramePointData {
  Frame X;
  /// g_i = <X_i, N>
  Vec3 g;
  /// Tangential projections E_i = X_i - g_i N.
  Frame E;
};

FramePointData frame_at(const AmbientSpace& ambient, const Vec4& p, const Vec4& normal);

/// Chart positions of a face's vertices. On the torus this also checks that
/// every lifted edge is shorter than the injectivity radius.
std::array<Vec4, 3> lift_face(const AmbientSpace& ambient, const Mesh& mesh, int face);

}  // namespace kindex
