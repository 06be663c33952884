#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tdnns/solver.hpp"

using namespace tdnns;

namespace {

/// Random sparse SPD matrix: diagonally dominant with symmetric off-diagonals.
SparseMatrix random_spd(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<Triplet> trip;
  std::vector<double> diag(n, 1.0);
  for (int k = 0; k < 4 * n; ++k) {
    const int i = pick(gen), j = pick(gen);
    if (i == j) continue;
    const double v = 0.1 * unif(gen);
    trip.push_back({i, j, v});
    trip.push_back({j, i, v});
    diag[i] += std::abs(v);
    diag[j] += std::abs(v);
  }
  for (int i = 0; i < n; ++i) trip.push_back({i, i, diag[i]});
  return from_triplets(n, n, trip);
}

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = unif(gen);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("from_triplets sums duplicates and sorts columns") {
  const std::vector<Triplet> trip = {
      {1, 2, 3.0}, {0, 1, 1.0}, {1, 0, 4.0}, {1, 2, -1.0}, {0, 0, 2.0},
  };
  const SparseMatrix a = from_triplets(2, 3, trip);
  CHECK(a.rows == 2);
  CHECK(a.cols == 3);
  REQUIRE(a.nnz() == 4);  // the two (1,2) entries merge
  CHECK(a.row_ptr == std::vector<int>{0, 2, 4});
  CHECK(a.col_idx == std::vector<int>{0, 1, 0, 2});
  CHECK(a.values == std::vector<double>{2.0, 1.0, 4.0, 2.0});

  SUBCASE("out-of-range indices are rejected") {
    CHECK_THROWS_AS(from_triplets(2, 3, {{2, 0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(from_triplets(2, 3, {{0, 3, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(from_triplets(2, 3, {{-1, 0, 1.0}}), std::invalid_argument);
  }
}

TEST_CASE("multiply and multiply_transposed agree with dense arithmetic") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int rows = 7, cols = 5;
  std::vector<double> dense(rows * cols, 0.0);
  std::vector<Triplet> trip;
  std::uniform_int_distribution<int> pr(0, rows - 1), pc(0, cols - 1);
  for (int k = 0; k < 20; ++k) {
    const int i = pr(gen), j = pc(gen);
    const double v = unif(gen);
    trip.push_back({i, j, v});
    dense[i * cols + j] += v;
  }
  const SparseMatrix a = from_triplets(rows, cols, trip);

  const std::vector<double> x = random_vector(cols, 6);
  const std::vector<double> y = random_vector(rows, 7);
  std::vector<double> ax_ref(rows, 0.0), aty_ref(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      ax_ref[i] += dense[i * cols + j] * x[j];
      aty_ref[j] += dense[i * cols + j] * y[i];
    }
  CHECK(max_abs_diff(a.multiply(x), ax_ref) < 1e-14);
  CHECK(max_abs_diff(a.multiply_transposed(y), aty_ref) < 1e-14);
}

TEST_CASE("solve_spd: direct and CG agree on a random SPD system") {
  const int n = 120;
  const SparseMatrix a = random_spd(n, 42);
  const std::vector<double> b = random_vector(n, 43);

  const std::vector<double> xd = solve_spd(a, b);
  CHECK(max_abs_diff(a.multiply(xd), b) < 1e-10);

  SolveOptions cg;
  cg.method = SolveMethod::ConjugateGradient;
  cg.cg_tolerance = 1e-12;
  SolveStats stats;
  const std::vector<double> xc = solve_spd(a, b, cg, &stats);
  CHECK(stats.method == SolveMethod::ConjugateGradient);
  CHECK(stats.iterations > 0);
  CHECK(stats.residual <= 1e-12);
  CHECK(max_abs_diff(xc, xd) < 1e-9);
}

TEST_CASE("solve_spd rejects non-SPD input") {
  // Indefinite saddle matrix [[1, 2], [2, 1]]: eigenvalues 3 and -1.
  const SparseMatrix a =
      from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(solve_spd(a, {1.0, 1.0}), std::invalid_argument);
  CHECK(!cholesky_pivots_positive(a));
  CHECK(smallest_eigenvalue_dense(a) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cholesky_pivots_positive and smallest_eigenvalue_dense on SPD input") {
  const SparseMatrix a = random_spd(40, 9);
  CHECK(cholesky_pivots_positive(a));
  CHECK(smallest_eigenvalue_dense(a) > 0.0);
}

TEST_CASE("solve_symmetric_indefinite handles saddle systems") {
  // [[0, 1], [1, 0]] x = (3, 5)  =>  x = (5, 3); Cholesky would fail here.
  const std::vector<double> a = {0.0, 1.0, 1.0, 0.0};
  const std::vector<double> x = solve_symmetric_indefinite(a, 2, {3.0, 5.0});
  CHECK(x[0] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-14));

  SUBCASE("random symmetric indefinite system") {
    const int n = 30;
    std::mt19937 gen(13);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> m(n * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = unif(gen);
        m[i * n + j] = m[j * n + i] = v;
      }
    const std::vector<double> b = random_vector(n, 14);
    const std::vector<double> sol = solve_symmetric_indefinite(m, n, b);
    std::vector<double> mx(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mx[i] += m[i * n + j] * sol[j];
    CHECK(max_abs_diff(mx, b) < 1e-11);
  }
}

TEST_CASE("CG fails loudly when the iteration cap is too small") {
  const SparseMatrix a = random_spd(80, 3);
  const std::vector<double> b = random_vector(80, 4);
  SolveOptions cg;
  cg.method = SolveMethod::ConjugateGradient;
  cg.cg_tolerance = 1e-14;
  cg.cg_max_iter_factor = 0;
  CHECK_THROWS_AS(solve_spd(a, b, cg), std::invalid_argument);
}
