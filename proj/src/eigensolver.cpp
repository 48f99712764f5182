#include "kindex/eigensolver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kindex {

double infinity_norm(const SparseMatrix& a) {
  Vector rows = Vector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

namespace {

// Solves (T - shift I) x = b for symmetric tridiagonal T by Gaussian
// elimination with partial pivoting; tiny pivots are replaced by `floor`.
Vector tridiagonal_solve(const Vector& diag, const Vector& sub, double shift, Vector b, double floor) {
  const int n = static_cast<int>(diag.size());
  // row i holds u0 (diagonal), u1, u2 (fill-in) after elimination
  Vector u0(n), u1 = Vector::Zero(n), u2 = Vector::Zero(n), l = Vector::Zero(n);
  std::vector<char> swapped(n, 0);
  double a = diag[0] - shift, c = n > 1 ? sub[0] : 0.0, d = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    const double below = sub[i];
    const double next_diag = diag[i + 1] - shift;
    const double next_sup = i + 1 < n - 1 ? sub[i + 1] : 0.0;
    if (std::abs(a) >= std::abs(below)) {
      if (a == 0.0) a = floor;
      const double m = below / a;
      u0[i] = a;
      u1[i] = c;
      u2[i] = d;
      l[i] = m;
      a = next_diag - m * c;
      c = next_sup;
      d = 0.0;
    } else {
      const double m = a / below;
      u0[i] = below;
      u1[i] = next_diag;
      u2[i] = next_sup;
      l[i] = m;
      swapped[i] = 1;
      a = c - m * next_diag;
      c = -m * next_sup;
      d = 0.0;
    }
  }
  u0[n - 1] = std::abs(a) < floor ? std::copysign(floor, a == 0.0 ? 1.0 : a) : a;
  for (int i = 0; i < n - 1; ++i) {
    if (swapped[i]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= l[i] * b[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double v = b[i];
    if (i + 1 < n) v -= u1[i] * b[i + 1];
    if (i + 2 < n) v -= u2[i] * b[i + 2];
    double p = u0[i];
    if (std::abs(p) < floor) p = std::copysign(floor, p == 0.0 ? 1.0 : p);
    b[i] = v / p;
  }
  return b;
}

// Lowest m eigenvectors of a symmetric tridiagonal matrix from its eigenvalues,
// by inverse iteration; vectors of close eigenvalues are kept orthogonal.
Matrix tridiagonal_vectors(const Vector& diag, const Vector& sub, const Vector& values, int m) {
  const int n = static_cast<int>(diag.size());
  double norm = 0.0;
  for (int i = 0; i < n; ++i)
    norm = std::max(norm, std::abs(diag[i]) + (i > 0 ? std::abs(sub[i - 1]) : 0.0) + (i + 1 < n ? std::abs(sub[i]) : 0.0));
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = eps * std::max(norm, 1.0);
  const double cluster = 1e-3 * std::max(norm, 1.0);
  std::mt19937_64 rng(0x7472696469616cULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix z(n, m);
  int first = 0;
  for (int j = 0; j < m; ++j) {
    if (j > 0 && values[j] - values[j - 1] > cluster) first = j;
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    x.normalize();
    // a slightly perturbed shift keeps pivots away from zero
    const double shift = values[j] + (j - first) * 10.0 * floor;
    for (int it = 0; it < 5; ++it) {
      x = tridiagonal_solve(diag, sub, shift, x, floor);
      for (int k = first; k < j; ++k) x -= z.col(k).dot(x) * z.col(k);
      x.normalize();
    }
    z.col(j) = x;
  }
  return z;
}

// Rayleigh-Ritz of `a` on the span of orthonormal columns x: returns pairs ascending.
void rayleigh_ritz(const Matrix& a, Matrix& x, Vector& values) {
  const Matrix h = x.transpose() * a * x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
  values = es.eigenvalues();
  x = x * es.eigenvectors();
}

}  // namespace

EigenPairs lowest_dense(const Matrix& a, int m, const Vector* deflate) {
  const int n = static_cast<int>(a.rows());
  const int limit = deflate ? n - 1 : n;
  if (m < 1 || m > limit) throw SolverError("requested eigenpair count out of range");

  Matrix work = a;
  if (deflate) {
    // P A P + alpha y y^T with alpha above the spectrum keeps y out of the
    // lowest eigenpairs.
    const Vector& y = *deflate;
    const Vector ay = a * y;
    const double yay = y.dot(ay);
    work -= y * ay.transpose() + ay * y.transpose();
    work += (yay * y) * y.transpose();
    const double alpha = 2.0 * a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    work += alpha * y * y.transpose();
  }

  EigenPairs out;
  out.method = "dense";
  if (n <= 256 || 4 * m > n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(work);
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
    out.values = es.eigenvalues().head(m);
    out.vectors = es.eigenvectors().leftCols(m);
  } else {
    // Householder tridiagonalization, all eigenvalues of the tridiagonal
    // matrix, then only the m wanted eigenvectors.
    Eigen::Tridiagonalization<Matrix> tri(work);
    const Vector diag = tri.diagonal();
    const Vector sub = tri.subDiagonal();
    // the tridiagonal QR iteration converges reliably only on scaled input
    const double scale = std::max({diag.cwiseAbs().maxCoeff(), sub.cwiseAbs().maxCoeff(), 1e-300});
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.computeFromTridiagonal(Vector(diag / scale), Vector(sub / scale), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
    const Matrix z = tridiagonal_vectors(diag, sub, scale * es.eigenvalues(), m);
    out.vectors = tri.matrixQ() * z;
    Eigen::HouseholderQR<Matrix> qr(out.vectors);
    out.vectors = qr.householderQ() * Matrix::Identity(n, m);
    rayleigh_ritz(work, out.vectors, out.values);
  }
  out.residuals.resize(m);
  const Matrix r = work * out.vectors - out.vectors * out.values.asDiagonal();
  for (int k = 0; k < m; ++k) out.residuals[k] = r.col(k).norm();
  return out;
}

namespace {

void project_out(Matrix& x, const Vector* y) {
  if (y) x -= *y * (y->transpose() * x);
}

Matrix orthonormalize(const Matrix& x) {
  Eigen::HouseholderQR<Matrix> qr(x);
  return qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
}

}  // namespace

EigenPairs lowest_sparse(const SparseMatrix& a, int m, double shift, const Vector* deflate,
                         const IterativeOptions& options) {
  const int n = static_cast<int>(a.rows());
  const int limit = deflate ? n - 1 : n;
  if (m < 1 || m > limit) throw SolverError("requested eigenpair count out of range");
  const int block = std::min(limit, std::max(2 * m, m + options.extra_block));
  if (block >= limit || n <= 64) return lowest_dense(Matrix(a), m, deflate);

  SparseMatrix shifted = a;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw SolverError("shifted factorization failed");
  if ((ldlt.vectorD().array() <= 0.0).any()) throw SolverError("shift is not below the spectrum");

  Vector solved_deflate;
  double deflate_weight = 0.0;
  if (deflate) {
    solved_deflate = ldlt.solve(*deflate);
    deflate_weight = deflate->dot(solved_deflate);
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = normal(rng);
  project_out(x, deflate);
  x = orthonormalize(x);

  const double scale = std::max(infinity_norm(a), 1e-300);
  EigenPairs out;
  out.method = "shift-invert-subspace";
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Matrix z = ldlt.solve(x);
    if (deflate) {
      // Solves the restricted shifted system exactly: z stays orthogonal to y.
      const Eigen::RowVectorXd mu = -(deflate->transpose() * z) / deflate_weight;
      z += solved_deflate * mu;
    }
    project_out(z, deflate);
    const Matrix q = orthonormalize(z);
    Matrix aq = a * q;
    project_out(aq, deflate);
    Matrix h = q.transpose() * aq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(h);
    x = q * ritz.eigenvectors();
    const Matrix ax = aq * ritz.eigenvectors();

    Vector res(m);
    for (int k = 0; k < m; ++k) res[k] = (ax.col(k) - ritz.eigenvalues()[k] * x.col(k)).norm();
    if (res.maxCoeff() <= options.tolerance * scale || iter == options.max_iterations) {
      if (res.maxCoeff() > options.tolerance * scale)
        throw SolverError("subspace iteration did not converge");
      out.values = ritz.eigenvalues().head(m);
      out.vectors = x.leftCols(m);
      out.residuals = res;
      out.iterations = iter;
      return out;
    }
  }
  throw SolverError("subspace iteration did not converge");
}

}  // namespace kindex
