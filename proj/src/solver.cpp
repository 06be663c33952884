// Sparse/dense linear solvers on top of Eigen and LAPACK.
#include "tdnns/solver.hpp"

#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <numeric>

namespace tdnns {

namespace {

/// Zero-copy Eigen view of a CSR matrix.
Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> eigen_view(const SparseMatrix& a) {
  return {a.rows, a.cols, a.nnz(), a.row_ptr.data(), a.col_idx.data(), a.values.data()};
}

}  // namespace

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  TDNNS_REQUIRE(static_cast<int>(x.size()) == cols, "matrix-vector size mismatch");
  std::vector<double> y(rows, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) y[i] += values[p] * x[col_idx[p]];
  return y;
}

std::vector<double> SparseMatrix::multiply_transposed(const std::vector<double>& x) const {
  TDNNS_REQUIRE(static_cast<int>(x.size()) == rows, "matrix-vector size mismatch");
  std::vector<double> y(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) y[col_idx[p]] += values[p] * x[i];
  return y;
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  SparseMatrix a;
  a.rows = rows;
  a.cols = cols;

  std::vector<int> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return triplets[i].row != triplets[j].row ? triplets[i].row < triplets[j].row
                                              : triplets[i].col < triplets[j].col;
  });

  a.row_ptr.assign(rows + 1, 0);
  int last_row = -1, last_col = -1;
  for (size_t idx = 0; idx < order.size(); ++idx) {
    const Triplet& t = triplets[order[idx]];
    TDNNS_REQUIRE(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols,
                  "triplet index out of range");
    if (t.row == last_row && t.col == last_col) {
      a.values.back() += t.value;  // duplicates are consecutive after sorting
    } else {
      a.col_idx.push_back(t.col);
      a.values.push_back(t.value);
      a.row_ptr[t.row + 1] += 1;
      last_row = t.row;
      last_col = t.col;
    }
  }
  for (int i = 0; i < rows; ++i) a.row_ptr[i + 1] += a.row_ptr[i];
  return a;
}

std::vector<double> solve_spd(const SparseMatrix& a, const std::vector<double>& b,
                              const SolveOptions& opts, SolveStats* stats) {
  TDNNS_REQUIRE(a.rows == a.cols, "solve_spd needs a square matrix");
  TDNNS_REQUIRE(static_cast<int>(b.size()) == a.rows, "right-hand side length mismatch");
  if (a.rows == 0) return {};
  const auto view = eigen_view(a);
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), b.size());
  Eigen::VectorXd x;

  if (opts.method == SolveMethod::Direct) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    llt.compute(Eigen::SparseMatrix<double>(view));
    TDNNS_REQUIRE(llt.info() == Eigen::Success,
                  "sparse Cholesky failed: matrix is not positive definite");
    x = llt.solve(rhs);
    if (stats) *stats = {SolveMethod::Direct, 0, 0.0};
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opts.cg_tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(opts.cg_max_iter_factor) * a.rows);
    Eigen::SparseMatrix<double> mat(view);
    cg.compute(mat);
    x = cg.solve(rhs);
    TDNNS_REQUIRE(cg.info() == Eigen::Success,
                  "conjugate gradient did not converge to tolerance " +
                      std::to_string(opts.cg_tolerance) + " within " +
                      std::to_string(opts.cg_max_iter_factor * a.rows) + " iterations");
    if (stats) *stats = {SolveMethod::ConjugateGradient, static_cast<int>(cg.iterations()),
                         cg.error()};
  }
  return {x.data(), x.data() + x.size()};
}

std::vector<double> solve_symmetric_indefinite(std::vector<double> a, int n,
                                               std::vector<double> b) {
  TDNNS_REQUIRE(static_cast<int>(a.size()) == static_cast<long>(n) * n,
                "dense matrix size mismatch");
  TDNNS_REQUIRE(static_cast<int>(b.size()) == n, "right-hand side length mismatch");
  if (n == 0) return {};
  std::vector<lapack_int> ipiv(n);
  const lapack_int info = LAPACKE_dsysv(LAPACK_ROW_MAJOR, 'L', n, 1, a.data(), n, ipiv.data(),
                                        b.data(), 1);
  TDNNS_REQUIRE(info == 0, "symmetric indefinite solve failed (dsysv info = " +
                               std::to_string(info) + ")");
  return b;
}

double smallest_eigenvalue_dense(const SparseMatrix& a) {
  TDNNS_REQUIRE(a.rows == a.cols, "eigenvalue computation needs a square matrix");
  Eigen::MatrixXd dense = Eigen::MatrixXd(eigen_view(a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
  TDNNS_REQUIRE(es.info() == Eigen::Success, "symmetric eigenvalue computation failed");
  return es.eigenvalues()(0);
}

bool cholesky_pivots_positive(const SparseMatrix& a) {
  TDNNS_REQUIRE(a.rows == a.cols, "Cholesky check needs a square matrix");
  if (a.rows == 0) return true;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  llt.compute(Eigen::SparseMatrix<double>(eigen_view(a)));
  return llt.info() == Eigen::Success;
}

}  // namespace tdnns
