// Linear algebra backends: CSR sparse storage, sparse Cholesky / CG for
// symmetric positive definite systems, dense Bunch-Kaufman for symmetric
// indefinite ones.
#pragma once

#include <string>
#include <vector>

#include "tdnns/common.hpp"

namespace tdnns {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  ///< size rows + 1
  std::vector<int> col_idx;
  std::vector<double> values;

  int nnz() const { return static_cast<int>(values.size()); }
  /// y = A x.
  std::vector<double> multiply(const std::vector<double>& x) const;
  /// y = A' x.
  std::vector<double> multiply_transposed(const std::vector<double>& x) const;
};

/// Builds CSR from triplets, summing duplicates.  Deterministic: entries are
/// stable-sorted by (row, col) and accumulated in insertion order.
SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);

enum class SolveMethod { Direct, ConjugateGradient };

struct SolveOptions {
  SolveMethod method = SolveMethod::Direct;
  double cg_tolerance = 1e-10;     ///< relative residual target
  int cg_max_iter_factor = 10;     ///< iteration cap = factor * n
};

struct SolveStats {
  SolveMethod method = SolveMethod::Direct;
  int iterations = 0;          ///< CG only
  double residual = 0.0;       ///< CG only: achieved relative residual
};

/// Solves A x = b for symmetric positive definite A.  Direct path is sparse
/// Cholesky (fails with a descriptive error if a pivot is non-positive, i.e.
/// the matrix is not SPD); CG uses Jacobi preconditioning and fails if the
/// tolerance is not reached within the iteration cap.
std::vector<double> solve_spd(const SparseMatrix& a, const std::vector<double>& b,
                              const SolveOptions& opts = {}, SolveStats* stats = nullptr);

/// Solves the dense symmetric indefinite system A x = b (Bunch-Kaufman).
/// `a` is the full matrix in row-major order, n x n.
std::vector<double> solve_symmetric_indefinite(std::vector<double> a, int n,
                                               std::vector<double> b);

/// Smallest eigenvalue of a symmetric matrix given in CSR form, computed
/// densely.  Intended for small certification problems.
double smallest_eigenvalue_dense(const SparseMatrix& a);

/// Attempts a sparse Cholesky factorization and reports whether all pivots
/// are positive (i.e. the matrix is numerically SPD).
bool cholesky_pivots_positive(const SparseMatrix& a);

}  // namespace tdnns
