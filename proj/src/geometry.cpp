#include "kindex/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace kindex {

namespace {

// Vector x with det[a, b, c, x] = <n, x>.
Vec4 cross4(const Vec4& a, const Vec4& b, const Vec4& c) {
  Vec4 n;
  for (int i = 0; i < 4; ++i) {
    Mat3 minor;
    int r = 0;
    for (int row = 0; row < 4; ++row) {
      if (row == i) continue;
      minor.row(r++) = Vec3(a[row], b[row], c[row]);
    }
    n[i] = ((i % 2) == 0 ? -1.0 : 1.0) * minor.determinant();
  }
  return n;
}

FaceFrame make_frame(const std::array<Vec4, 3>& c, bool sphere, int f) {
  FaceFrame fr;
  fr.corners = c;
  const Vec4 e1 = c[1] - c[0];
  const Vec4 e2 = c[2] - c[0];
  const double l1 = e1.norm();
  if (!(l1 > 0.0)) throw GeometryError("degenerate face " + std::to_string(f));
  fr.t1 = e1 / l1;
  Vec4 w = e2 - e2.dot(fr.t1) * fr.t1;
  const double h = w.norm();
  if (!(h > 1e-14 * std::max(l1, e2.norm()))) throw GeometryError("degenerate face " + std::to_string(f));
  fr.t2 = w / h;
  fr.area = 0.5 * l1 * h;

  if (!sphere) {
    fr.base = (c[0] + c[1] + c[2]) / 3.0;
    const Vec3 n = fr.t1.head<3>().cross(fr.t2.head<3>());
    fr.normal = Vec4(n[0], n[1], n[2], 0.0);
    return fr;
  }
  // All corners are unit vectors, so the point of the face plane closest to the
  // origin is the circumcenter; it is orthogonal to the face plane.
  Vec4 q = c[0] - c[0].dot(fr.t1) * fr.t1 - c[0].dot(fr.t2) * fr.t2;
  const double qn = q.norm();
  if (!(qn > 0.0)) throw GeometryError("face " + std::to_string(f) + " passes through the origin");
  fr.base = q / qn;
  const Vec4 n = cross4(fr.base, fr.t1, fr.t2);
  fr.normal = n.normalized();
  return fr;
}

}  // namespace

std::vector<FaceFrame> face_frames(const Mesh& mesh, const AmbientSpace& ambient) {
  const bool sphere = ambient.kind() == AmbientKind::Sphere3;
  std::vector<FaceFrame> frames(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) frames[f] = make_frame(lift_face(ambient, mesh, f), sphere, f);
  return frames;
}

double SurfaceGeometry::total_area() const {
  double a = 0.0;
  for (const auto& fr : faces) a += fr.area;
  return a;
}

double SurfaceGeometry::max_abs_mean_curvature() const {
  return mean_curvature.size() == 0 ? 0.0 : mean_curvature.cwiseAbs().maxCoeff();
}

Vec4 project_tangent(const AmbientSpace& ambient, const Vec4& p, const Vec4& normal, const Vec4& v) {
  Vec4 t = v - v.dot(normal) * normal;
  if (ambient.kind() == AmbientKind::Sphere3) t -= t.dot(p) * p;
  return t;
}

std::array<Vec4, 2> tangent_basis(const AmbientSpace& ambient, const Vec4& p, const Vec4& normal) {
  std::array<Vec4, 2> basis;
  int found = 0;
  const int dim = chart_dimension(ambient.kind());
  for (int axis = 0; axis < dim && found < 2; ++axis) {
    Vec4 e = Vec4::Zero();
    e[axis] = 1.0;
    Vec4 t = project_tangent(ambient, p, normal, e);
    for (int k = 0; k < found; ++k) t -= t.dot(basis[k]) * basis[k];
    // Any candidate keeping a third of its length gives a stable basis vector.
    if (t.norm() > 0.3) basis[found++] = t.normalized();
  }
  if (found < 2) throw GeometryError("cannot build a tangent basis");
  return basis;
}

Mat2 face_derivative(const FaceFrame& face, const std::array<Vec4, 3>& values) {
  Mat2 edge_gram = Mat2::Zero();
  Mat2 cross = Mat2::Zero();
  for (int k = 0; k < 3; ++k) {
    const Vec2 eps = face.edge(k);
    const Vec2 delta = face.local(values[(k + 1) % 3] - values[k]);
    edge_gram += eps * eps.transpose();
    cross += delta * eps.transpose();
  }
  const double det = edge_gram.determinant();
  if (!(std::abs(det) > 1e-14 * edge_gram.squaredNorm())) throw GeometryError("degenerate fit");
  return cross * edge_gram.inverse();
}

SurfaceGeometry shape_operator(const Mesh& mesh, const AmbientSpace& ambient, const AnalyticSurface* analytic) {
  SurfaceGeometry g;
  g.source = analytic ? GeometrySource::Analytic : GeometrySource::Estimated;
  g.faces = face_frames(mesh, ambient);
  const int nv = mesh.num_vertices();
  const int nf = mesh.num_faces();

  g.vertex_area = Vector::Zero(nv);
  for (int f = 0; f < nf; ++f)
    for (int v : mesh.face(f)) g.vertex_area[v] += g.faces[f].area / 3.0;

  g.vertex_normal.resize(nv);
  g.face_shape.resize(nf);
  g.mean_curvature = Vector::Zero(nv);
  g.norm_a_sq = Vector::Zero(nv);

  if (analytic) {
    for (int v = 0; v < nv; ++v) {
      const Vec4& p = mesh.position(v);
      g.vertex_normal[v] = analytic->normal(p).normalized();
      const auto b = tangent_basis(ambient, p, g.vertex_normal[v]);
      const Mat4 form = analytic->shape_form(p);
      Mat2 s;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s(i, j) = b[i].dot(form * b[j]);
      s = 0.5 * (s + s.transpose()).eval();
      g.mean_curvature[v] = 0.5 * s.trace();
      g.norm_a_sq[v] = s.squaredNorm();
    }
    for (int f = 0; f < nf; ++f) {
      const auto& fr = g.faces[f];
      const Mat4 form = analytic->shape_form(fr.base);
      Mat2 s;
      s(0, 0) = fr.t1.dot(form * fr.t1);
      s(1, 1) = fr.t2.dot(form * fr.t2);
      s(0, 1) = s(1, 0) = 0.5 * (fr.t1.dot(form * fr.t2) + fr.t2.dot(form * fr.t1));
      g.face_shape[f] = s;
    }
    return g;
  }

  // Max's weights, area / (|e_a|^2 |e_b|^2) over the two edges at the vertex:
  // exact for vertices on a sphere, second order on irregular meshes.
  for (int v = 0; v < nv; ++v) {
    Vec4 n = Vec4::Zero();
    for (int f : mesh.vertex_faces(v)) {
      const auto& fr = g.faces[f];
      const auto& fc = mesh.face(f);
      const int c = fc[0] == v ? 0 : fc[1] == v ? 1 : 2;
      const double la = (fr.corners[(c + 1) % 3] - fr.corners[c]).squaredNorm();
      const double lb = (fr.corners[(c + 2) % 3] - fr.corners[c]).squaredNorm();
      n += fr.area / (la * lb) * fr.normal;
    }
    if (ambient.kind() == AmbientKind::Sphere3) {
      const Vec4& p = mesh.position(v);
      n -= n.dot(p) * p;
    }
    const double len = n.norm();
    if (!(len > 0.0)) throw GeometryError("vanishing vertex normal at vertex " + std::to_string(v));
    g.vertex_normal[v] = n / len;
  }
  for (int f = 0; f < nf; ++f) {
    const auto& fc = mesh.face(f);
    const Mat2 dn = face_derivative(g.faces[f], {g.vertex_normal[fc[0]], g.vertex_normal[fc[1]], g.vertex_normal[fc[2]]});
    g.face_shape[f] = -0.5 * (dn + dn.transpose());
  }
  for (int v = 0; v < nv; ++v) {
    double wsum = 0.0, h = 0.0, a2 = 0.0;
    for (int f : mesh.vertex_faces(v)) {
      const double w = g.faces[f].area;
      wsum += w;
      h += w * g.face_mean_curvature(f);
      a2 += w * g.face_norm_a_sq(f);
    }
    g.mean_curvature[v] = h / wsum;
    g.norm_a_sq[v] = a2 / wsum;
  }
  return g;
}

}  // namespace kindex
