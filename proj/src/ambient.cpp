#include "kindex/ambient.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace kindex {

namespace {
constexpr double kOnSphereTolerance = 1e-9;
constexpr double kUnitNormalTolerance = 1e-9;

const Vec4 kI(0, 1, 0, 0);
const Vec4 kJ(0, 0, 1, 0);
const Vec4 kK(0, 0, 0, 1);
}  // namespace

AmbientSpace AmbientSpace::flat_torus(const Mat3& lattice) {
  if (!lattice.allFinite() || std::abs(lattice.determinant()) < 1e-14)
    throw PreconditionError("flat torus lattice must be invertible");
  return AmbientSpace(AmbientKind::FlatTorus3, lattice);
}

AmbientSpace AmbientSpace::of(const Mesh& mesh) {
  switch (mesh.ambient()) {
    case AmbientKind::Euclidean3: return euclidean();
    case AmbientKind::Sphere3: return sphere();
    case AmbientKind::FlatTorus3: return flat_torus(mesh.lattice());
  }
  throw Error("unknown ambient");
}

double AmbientSpace::injectivity_radius() const {
  switch (kind_) {
    case AmbientKind::Euclidean3: return std::numeric_limits<double>::infinity();
    case AmbientKind::Sphere3: return std::numbers::pi;
    case AmbientKind::FlatTorus3: break;
  }
  // Shortest nonzero lattice vector over small coefficient combinations; exact
  // for the reduced lattices used here.
  double shortest = std::numeric_limits<double>::infinity();
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        shortest = std::min(shortest, (lattice_ * Vec3(a, b, c)).norm());
      }
  return 0.5 * shortest;
}

Vec4 quaternion_multiply(const Vec4& p, const Vec4& q) {
  return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
          p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
          p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
          p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

Frame killing_frame(const AmbientSpace& ambient, const Vec4& p) {
  if (ambient.kind() != AmbientKind::Sphere3)
    return {Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0)};
  if (std::abs(p.norm() - 1.0) > kOnSphereTolerance)
    throw PreconditionError("point is not on the unit 3-sphere");
  return {quaternion_multiply(p, kI), quaternion_multiply(p, kJ), quaternion_multiply(p, kK)};
}

double ricci_normal(const AmbientSpace& ambient, const Vec4& normal) {
  if (std::abs(normal.norm() - 1.0) > kUnitNormalTolerance)
    throw PreconditionError("ricci_normal needs a unit normal");
  return ambient.kind() == AmbientKind::Sphere3 ? 2.0 : 0.0;
}

FramePointData frame_at(const AmbientSpace& ambient, const Vec4& p, const Vec4& normal) {
  FramePointData d;
  d.X = killing_frame(ambient, p);
  for (int i = 0; i < 3; ++i) {
    d.g[i] = d.X[i].dot(normal);
    d.E[i] = d.X[i] - d.g[i] * normal;
  }
  return d;
}

std::array<Vec4, 3> lift_face(const AmbientSpace& ambient, const Mesh& mesh, int face) {
  auto p = mesh.chart_positions(face);
  if (ambient.kind() == AmbientKind::FlatTorus3) {
    const double limit = ambient.injectivity_radius();
    for (int k = 0; k < 3; ++k)
      if ((p[(k + 1) % 3] - p[k]).norm() >= limit)
        throw GeometryError("face too large for chart (face " + std::to_string(face) + ")");
  }
  return p;
}

}  // namespace kindex
