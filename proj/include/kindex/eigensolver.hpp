#pragma once

#include "kindex/common.hpp"

#include <cstdint>
#include <string>

namespace kindex {

/// Lowest eigenpairs of a symmetric matrix, ascending, with orthonormal
/// eigenvectors and the 2-norm residual of each pair.
struct EigenPairs {
  Vector values;
  Matrix vectors;
  Vector residuals;
  std::string method;
  int iterations = 0;
};

struct IterativeOptions {
  /// Convergence when every residual is below tolerance * ||A||_inf.
  double tolerance = 1e-11;
  int max_iterations = 2000;
  std::uint64_t seed = 0x6b696e646578ULL;
  /// Block size is max(2m, m + extra_block).
  int extra_block = 12;
};

/// Row-sum norm, an upper bound on the spectral radius.
double infinity_norm(const SparseMatrix& a);

/// The m smallest eigenpairs from a full dense decomposition. When `deflate` (unit vector)
/// is given the problem is restricted to its orthogonal complement.
EigenPairs lowest_dense(const Matrix& a, int m, const Vector* deflate = nullptr);

/// The m smallest eigenpairs of a sparse symmetric matrix by shift-invert
/// block subspace iteration with Rayleigh-Ritz. `shift` must lie strictly
/// below the spectrum. Deterministic for fixed options.
EigenPairs lowest_sparse(const SparseMatrix& a, int m, double shift, const Vector* deflate = nullptr,
                         const IterativeOptions& options = {});

}  // namespace kindex
