#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tdnns/postprocess.hpp"
#include "tdnns/presets.hpp"

using namespace tdnns;

TEST_CASE("error quadrature degree: 2(k+2) capped by the rule table") {
  CHECK(error_quadrature_degree(1) == 6);
  CHECK(error_quadrature_degree(2) == 8);
  CHECK(error_quadrature_degree(3) == 10);
  CHECK(error_quadrature_degree(4) == 12);
  CHECK(error_quadrature_degree(5) == 13);
}

TEST_CASE("convergence_rate recovers exact power laws") {
  CHECK(convergence_rate(8.0, 1.0, 0.2, 0.1) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(convergence_rate(9.0, 1.0, 0.3, 0.1) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK_THROWS_AS(convergence_rate(1.0, 1.0, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(convergence_rate(0.0, 1.0, 0.2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(convergence_rate(1.0, -1.0, 0.2, 0.1), std::invalid_argument);
}

TEST_CASE("l2_error: interpolants of polynomials have zero error") {
  const TriMesh mesh = unit_square_mesh(3);
  const FESpace wsp = build_space(mesh, SpaceKind::Deflection, 2);
  const std::function<double(Vec2)> f = [](Vec2 p) {
    return 1.0 + p.x * p.x - 0.5 * p.x * p.y;
  };
  const std::vector<double> coeffs = interpolate(wsp, f);
  CHECK(l2_error(wsp, coeffs, f) <= 1e-14);

  const FESpace tsp = build_space(mesh, SpaceKind::Rotation, 2);
  const std::function<Vec2(Vec2)> g = [](Vec2 p) {
    return Vec2{p.x * p.y, p.y * p.y - p.x};
  };
  CHECK(l2_error(tsp, interpolate(tsp, g), g) <= 1e-14);
}

TEST_CASE("l2_error with a null closure is the plain L2 norm") {
  // The exact solution norms below were computed with exact rational
  // arithmetic; the quadrature rule caps at degree 13, so integration of
  // these degree-24 integrands converges with the mesh.
  const TriMesh mesh = unit_square_mesh(8);
  const ClampedSquareCase cs;  // thickness 1e-3
  const FESpace wsp = build_space(mesh, SpaceKind::Deflection, 2);
  const FESpace tsp = build_space(mesh, SpaceKind::Rotation, 1);
  const std::vector<double> zero_w(wsp.ndof, 0.0);
  const std::vector<double> zero_t(tsp.ndof, 0.0);

  const double nw = l2_error(wsp, zero_w, cs.exact_deflection());
  CHECK(nw == doctest::Approx(2.7750200910692682024e-5).epsilon(1e-9));
  const double nth = l2_error(tsp, zero_t, cs.exact_rotation());
  CHECK(nth == doctest::Approx(1.5500321948905473604e-4).epsilon(1e-9));

  ClampedSquareCase thick = cs;
  thick.thickness = 1.0;
  const double nw1 = l2_error(wsp, zero_w, thick.exact_deflection());
  CHECK(nw1 == doctest::Approx(2.6011236536700360257e-4).epsilon(1e-9));
}

TEST_CASE("l2_difference measures distance to a refined field") {
  const TriMesh coarse = unit_square_mesh(2);
  const TriMesh fine = refine_uniform(refine_uniform(coarse));
  const FESpace wc = build_space(coarse, SpaceKind::Deflection, 2);
  const FESpace wf = build_space(fine, SpaceKind::Deflection, 2);

  SUBCASE("a shared polynomial field gives zero difference") {
    const std::function<double(Vec2)> f = [](Vec2 p) { return p.x * p.x + 2.0 * p.y; };
    CHECK(l2_difference(wf, interpolate(wf, f), wc, interpolate(wc, f), 2) <= 1e-13);
  }
  SUBCASE("differing fields give the L2 norm of the gap") {
    const std::function<double(Vec2)> f = [](Vec2 p) { return p.x; };
    const std::function<double(Vec2)> g = [](Vec2 p) { return p.x + 1.0; };
    const double d = l2_difference(wf, interpolate(wf, f), wc, interpolate(wc, g), 2);
    CHECK(d == doctest::Approx(1.0).epsilon(1e-13));  // constant gap of 1 on the unit square
  }
  SUBCASE("wrong refinement depth is rejected") {
    const std::vector<double> cf(wf.ndof, 0.0), cc(wc.ndof, 0.0);
    CHECK_THROWS_AS(l2_difference(wf, cf, wc, cc, 1), std::invalid_argument);
  }
}

TEST_CASE("VTK export: legacy unstructured grid with all fields") {
  const TriMesh mesh = unit_square_mesh(2);
  const ClampedSquareCase cs;
  const PlateProblem problem = cs.problem(mesh, 1, true);
  SolutionFields fields = solve_condensed(problem);
  fields.shear = recover_shear(problem, fields);
  const Spaces spaces = make_spaces(mesh, 1, true);

  std::ostringstream os;
  export_vtk(os, spaces, fields);
  const std::string vtk = os.str();

  CHECK(vtk.find("# vtk DataFile") != std::string::npos);
  CHECK(vtk.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(vtk.find("POINTS 9 double") != std::string::npos);
  CHECK(vtk.find("CELLS 8") != std::string::npos);
  CHECK(vtk.find("POINT_DATA 9") != std::string::npos);
  CHECK(vtk.find("SCALARS deflection") != std::string::npos);
  CHECK(vtk.find("CELL_DATA 8") != std::string::npos);
  CHECK(vtk.find("rotation") != std::string::npos);
  CHECK(vtk.find("moment_xx") != std::string::npos);
  CHECK(vtk.find("moment_yy") != std::string::npos);
  CHECK(vtk.find("moment_xy") != std::string::npos);
  CHECK(vtk.find("shear") != std::string::npos);

  // Every triangle is VTK cell type 5.
  size_t pos = vtk.find("CELL_TYPES 8");
  REQUIRE(pos != std::string::npos);
  std::istringstream rest(vtk.substr(pos));
  std::string line;
  std::getline(rest, line);
  for (int i = 0; i < 8; ++i) {
    std::getline(rest, line);
    CHECK(line == "5");
  }
}
