#include "kindex/hodge.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace kindex {

DecOperators dec_operators(const Mesh& mesh, const SurfaceGeometry& geom) {
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_edges();
  const int nf = mesh.num_faces();
  DecOperators dec;

  std::vector<Eigen::Triplet<double>> t0;
  t0.reserve(2 * static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    t0.emplace_back(e, mesh.edge(e).v0, -1.0);
    t0.emplace_back(e, mesh.edge(e).v1, 1.0);
  }
  dec.d0.resize(ne, nv);
  dec.d0.setFromTriplets(t0.begin(), t0.end());

  std::vector<Eigen::Triplet<double>> t1;
  t1.reserve(3 * static_cast<std::size_t>(nf));
  dec.star1 = Vector::Zero(ne);
  dec.star2.resize(nf);
  for (int f = 0; f < nf; ++f) {
    const auto& fr = geom.faces[f];
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.face_edge(f, k);
      t1.emplace_back(f, e, mesh.face_edge_sign(f, k));
      const Vec4 a = fr.corners[k] - fr.corners[(k + 2) % 3];
      const Vec4 b = fr.corners[(k + 1) % 3] - fr.corners[(k + 2) % 3];
      dec.star1[e] += 0.5 * a.dot(b) / (2.0 * fr.area);
    }
    dec.star2[f] = 1.0 / fr.area;
  }
  dec.d1.resize(nf, ne);
  dec.d1.setFromTriplets(t1.begin(), t1.end());
  dec.star0 = geom.vertex_area;
  return dec;
}

double closed_residual(const DecOperators& dec, const Vector& form) {
  const Vector w = dec.star2.cwiseSqrt();
  const Vector num = w.asDiagonal() * (dec.d1 * form);
  const Vector mag = w.asDiagonal() * (dec.d1.cwiseAbs() * form.cwiseAbs());
  const double m = mag.norm();
  return m > 0.0 ? num.norm() / m : 0.0;
}

double coclosed_residual(const DecOperators& dec, const Vector& form) {
  const Vector w = dec.star0.cwiseSqrt().cwiseInverse();
  const Vector flux = dec.star1.asDiagonal() * form;
  const Vector num = w.asDiagonal() * (dec.d0.transpose() * flux);
  const Vector mag = w.asDiagonal() * (SparseMatrix(dec.d0.transpose()).cwiseAbs() * flux.cwiseAbs());
  const double m = mag.norm();
  return m > 0.0 ? num.norm() / m : 0.0;
}

FaceField whitney_vector(const Mesh& mesh, const SurfaceGeometry& geom, const Vector& form) {
  FaceField field(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& fr = geom.faces[f];
    Mat2 gram = Mat2::Zero();
    Vec2 rhs = Vec2::Zero();
    for (int k = 0; k < 3; ++k) {
      const Vec2 eps = fr.edge(k);
      const double value = mesh.face_edge_sign(f, k) * form[mesh.face_edge(f, k)];
      gram += eps * eps.transpose();
      rhs += value * eps;
    }
    if (!(std::abs(gram.determinant()) > 1e-14 * gram.squaredNorm()))
      throw GeometryError("degenerate face " + std::to_string(f));
    field[f] = gram.ldlt().solve(rhs);
  }
  return field;
}

FaceField rotate90(const SurfaceGeometry&, const FaceField& field) {
  FaceField out(field.size());
  for (std::size_t f = 0; f < field.size(); ++f) out[f] = Vec2(-field[f][1], field[f][0]);
  return out;
}

double HarmonicBasis::max_residual() const {
  double r = 0.0;
  for (double x : closed_residuals) r = std::max(r, x);
  for (double x : coclosed_residuals) r = std::max(r, x);
  return r;
}

Vector HarmonicBasis::combine_form(const Vector& coefficients) const { return forms * coefficients; }

FaceField HarmonicBasis::combine_field(const Vector& coefficients) const {
  FaceField out(fields.empty() ? 0 : fields.front().size(), Vec2::Zero());
  for (int a = 0; a < size(); ++a)
    for (std::size_t f = 0; f < out.size(); ++f) out[f] += coefficients[a] * fields[a][f];
  return out;
}

HarmonicBasis harmonic_basis(const Mesh& mesh, const SurfaceGeometry& geom, const DecOperators& dec, int genus,
                             const HarmonicOptions& options) {
  HarmonicBasis basis;
  basis.harmonic_tol = options.harmonic_tol;
  const int ne = mesh.num_edges();
  if (genus <= 0) {
    basis.forms.resize(ne, 0);
    basis.gap_ratio = std::numeric_limits<double>::infinity();
    return basis;
  }
  const int dim = 2 * genus;

  // Kernel of S = star1 d0 star0^-1 d0^T star1 + d1^T star2 d1 is exactly the
  // closed and co-closed forms. Star1 may vanish or change sign, so the
  // eigenproblem is posed against a positive diagonal edge mass instead.
  const SparseMatrix coderivative = dec.star1.asDiagonal() * dec.d0;
  const SparseMatrix s = SparseMatrix(coderivative * dec.star0.cwiseInverse().asDiagonal() *
                                      coderivative.transpose()) +
                         SparseMatrix(dec.d1.transpose() * dec.star2.asDiagonal() * dec.d1);
  Vector edge_mass = Vector::Zero(ne);
  Vector edge_length_sq = Vector::Zero(ne);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& fr = geom.faces[f];
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.face_edge(f, k);
      edge_mass[e] += fr.area;
      edge_length_sq[e] = (fr.corners[(k + 1) % 3] - fr.corners[k]).squaredNorm();
    }
  }
  edge_mass = edge_mass.cwiseQuotient(edge_length_sq);
  const Vector inv_sqrt = edge_mass.cwiseSqrt().cwiseInverse();
  const SparseMatrix standard = inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();

  double mean_diag = 0.0;
  for (int e = 0; e < ne; ++e) mean_diag += standard.coeff(e, e);
  mean_diag /= ne;
  const double shift = -1e-7 * mean_diag;

  if (dim + 1 > ne) throw ResolutionError("harmonic basis not resolved: mesh too small");
  const EigenPairs pairs = lowest_sparse(standard, dim + 1, shift, nullptr, options.iterative);
  basis.laplacian_eigenvalues = pairs.values;
  const double last_harmonic = std::abs(pairs.values[dim - 1]);
  const double first_other = pairs.values[dim];
  basis.gap_ratio = last_harmonic > 0.0 ? first_other / last_harmonic : std::numeric_limits<double>::infinity();
  if (!(first_other > 0.0) || basis.gap_ratio < options.min_gap_ratio) {
    throw ResolutionError("harmonic basis not resolved: eigenvalue ratio " + std::to_string(basis.gap_ratio) +
                          " after " + std::to_string(dim) + " harmonic forms");
  }
  if (last_harmonic > options.harmonic_tol * first_other) {
    throw ResolutionError("harmonic basis not resolved: eigenvalue " + std::to_string(last_harmonic) +
                          " exceeds harmonic_tol times the first non-harmonic eigenvalue");
  }

  Matrix forms = inv_sqrt.asDiagonal() * pairs.vectors.leftCols(dim);
  const Matrix gram = forms.transpose() * dec.star1.asDiagonal() * forms;
  Eigen::LLT<Matrix> llt(0.5 * (gram + gram.transpose()));
  if (llt.info() != Eigen::Success) throw ResolutionError("harmonic basis not resolved: star1 Gram matrix not positive");
  basis.forms = llt.matrixU().solve<Eigen::OnTheRight>(forms);

  for (int a = 0; a < dim; ++a) {
    const Vector w = basis.forms.col(a);
    basis.fields.push_back(whitney_vector(mesh, geom, w));
    basis.closed_residuals.push_back(closed_residual(dec, w));
    basis.coclosed_residuals.push_back(coclosed_residual(dec, w));
  }
  return basis;
}

void write_harmonic_edges_csv(const Mesh& mesh, const HarmonicBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "edge,v0,v1";
  for (int a = 0; a < basis.size(); ++a) out << ",omega_" << a + 1;
  out << '\n';
  char buf[40];
  for (int e = 0; e < mesh.num_edges(); ++e) {
    out << e << ',' << mesh.edge(e).v0 << ',' << mesh.edge(e).v1;
    for (int a = 0; a < basis.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", basis.forms(e, a));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_harmonic_faces_csv(const SurfaceGeometry& geom, const HarmonicBasis& basis,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "face,form,x1,x2,x3,x4\n";
  char buf[160];
  for (int a = 0; a < basis.size(); ++a) {
    for (std::size_t f = 0; f < geom.faces.size(); ++f) {
      const Vec4 v = geom.faces[f].ambient(basis.fields[a][f]);
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%.17g\n", f, a + 1, v[0], v[1], v[2], v[3]);
      out << buf;
    }
  }
}

}  // namespace kindex
