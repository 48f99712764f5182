#pragma once

#include "kindex/ambient.hpp"
#include "kindex/common.hpp"
#include "kindex/mesh.hpp"

#include <array>
#include <functional>
#include <vector>

namespace kindex {

/// Orthonormal frame of one (chart-lifted) face. (t1, t2, normal) is
/// positively oriented: normal = t1 x t2 in R^3, and det[base, t1, t2, normal]
/// > 0 on S^3. On S^3, `base` is the point of the sphere the face is
/// attached to and is orthogonal to t1, t2 and normal.
struct FaceFrame {
  std::array<Vec4, 3> corners;
  Vec4 base;
  Vec4 normal;
  Vec4 t1;
  Vec4 t2;
  double area = 0.0;

  Vec2 local(const Vec4& v) const { return {v.dot(t1), v.dot(t2)}; }
  Vec4 ambient(const Vec2& a) const { return a[0] * t1 + a[1] * t2; }
  /// Edge vector corner k -> corner k+1 in local coordinates.
  Vec2 edge(int k) const { return local(corners[(k + 1) % 3] - corners[k]); }
};

std::vector<FaceFrame> face_frames(const Mesh& mesh, const AmbientSpace& ambient);

enum class GeometrySource { Analytic, Estimated };

/// Closed-form geometry supplied by a generator.
struct AnalyticSurface {
  /// Unit normal at a point of the surface, matching the mesh orientation.
  std::function<Vec4(const Vec4&)> normal;
  /// Ambient matrix B such that <A x, y> = x^T B y for tangent x, y, with
  /// A = -dN the shape operator.
  std::function<Mat4(const Vec4&)> shape_form;
};

/// Discrete first and second fundamental forms. Mean curvature follows
/// 2H = tr A with A = -dN.
struct SurfaceGeometry {
  GeometrySource source = GeometrySource::Estimated;
  std::vector<FaceFrame> faces;
  /// Shape operator of each face in its (t1, t2) frame.
  std::vector<Mat2> face_shape;
  std::vector<Vec4> vertex_normal;
  Vector vertex_area;
  Vector mean_curvature;
  Vector norm_a_sq;

  double total_area() const;
  double max_abs_mean_curvature() const;
  double face_mean_curvature(int f) const { return 0.5 * face_shape[f].trace(); }
  double face_norm_a_sq(int f) const { return face_shape[f].squaredNorm(); }
};

/// Analytic path when `analytic` is given, estimator otherwise.
SurfaceGeometry shape_operator(const Mesh& mesh, const AmbientSpace& ambient,
                               const AnalyticSurface* analytic = nullptr);

/// Orthonormal basis of the surface tangent plane at an ambient point.
std::array<Vec4, 2> tangent_basis(const AmbientSpace& ambient, const Vec4& p, const Vec4& normal);

/// Least-squares linear map G on the face plane with G * edge_k ~ delta_k,
/// where delta_k is the tangential part of values[k+1] - values[k]. Throws
/// GeometryError when the edge system is rank deficient.
Mat2 face_derivative(const FaceFrame& face, const std::array<Vec4, 3>& values);

/// Projects an ambient vector at a vertex onto the tangent plane there.
Vec4 project_tangent(const AmbientSpace& ambient, const Vec4& p, const Vec4& normal, const Vec4& v);

}  // namespace kindex
