// Error norms, rates, and VTK output.
#include "tdnns/postprocess.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "tdnns/quadrature.hpp"

namespace tdnns {

int error_quadrature_degree(int order) {
  return std::min(std::max(2 * (order + 2), order + 4), kMaxQuadDegree);
}

namespace {

/// Integrates sq(x) over one element with the degree rule.
template <typename Fn>
double integrate_element(const TriMesh& mesh, int t, int degree, Fn&& sq) {
  const QuadRule& rule = triangle_rule(degree);
  const auto& tri = mesh.triangles[t];
  const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
  const double two_a = 2.0 * mesh.area(t);
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 x = a + rule.points[q].x * (b - a) + rule.points[q].y * (c - a);
    acc += rule.weights[q] * two_a * sq(x);
  }
  return acc;
}

int scalar_components(const FESpace& space) { return space.num_components(); }

}  // namespace

double l2_error(const FESpace& space, const std::vector<double>& coeffs,
                const std::function<double(Vec2)>& exact, int degree) {
  TDNNS_REQUIRE(scalar_components(space) == 1, "scalar space expected");
  TDNNS_REQUIRE(static_cast<int>(coeffs.size()) == space.ndof, "coefficient length mismatch");
  if (degree < 0) degree = error_quadrature_degree(space.order);
  const TriMesh& mesh = *space.mesh;
  double acc = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const LocalPoly p = local_field(space, coeffs, t);
    acc += integrate_element(mesh, t, degree, [&](Vec2 x) {
      const double d = eval_scalar(p, x) - (exact ? exact(x) : 0.0);
      return d * d;
    });
  }
  return std::sqrt(acc);
}

double l2_error(const FESpace& space, const std::vector<double>& coeffs,
                const std::function<Vec2(Vec2)>& exact, int degree) {
  TDNNS_REQUIRE(scalar_components(space) == 2, "vector space expected");
  TDNNS_REQUIRE(static_cast<int>(coeffs.size()) == space.ndof, "coefficient length mismatch");
  if (degree < 0) degree = error_quadrature_degree(space.order);
  const TriMesh& mesh = *space.mesh;
  double acc = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const LocalPoly p = local_field(space, coeffs, t);
    acc += integrate_element(mesh, t, degree, [&](Vec2 x) {
      const Vec2 d = eval_vector(p, x) - (exact ? exact(x) : Vec2{0.0, 0.0});
      return dot(d, d);
    });
  }
  return std::sqrt(acc);
}

double l2_difference(const FESpace& fine_space, const std::vector<double>& fine_coeffs,
                     const FESpace& coarse_space, const std::vector<double>& coarse_coeffs,
                     int depth, int degree) {
  TDNNS_REQUIRE(fine_space.kind == coarse_space.kind && fine_space.order == coarse_space.order,
                "spaces of the two levels must match");
  TDNNS_REQUIRE(depth >= 0, "depth must be nonnegative");
  const int ncomp = fine_space.num_components();
  TDNNS_REQUIRE(ncomp <= 2, "scalar or vector space expected");
  if (degree < 0) degree = error_quadrature_degree(fine_space.order);
  const TriMesh& mesh = *fine_space.mesh;
  int stride = 1;
  for (int d = 0; d < depth; ++d) stride *= 4;
  TDNNS_REQUIRE(mesh.num_triangles() == coarse_space.mesh->num_triangles() * stride,
                "fine mesh is not a depth-fold refinement of the coarse mesh");

  double acc = 0.0;
  int ancestor = -1;
  LocalPoly cp;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const LocalPoly fp = local_field(fine_space, fine_coeffs, t);
    if (t / stride != ancestor) {
      ancestor = t / stride;
      cp = local_field(coarse_space, coarse_coeffs, ancestor);
    }
    acc += integrate_element(mesh, t, degree, [&](Vec2 x) {
      if (ncomp == 1) {
        const double d = eval_scalar(fp, x) - eval_scalar(cp, x);
        return d * d;
      }
      const Vec2 d = eval_vector(fp, x) - eval_vector(cp, x);
      return dot(d, d);
    });
  }
  return std::sqrt(acc);
}

double convergence_rate(double err_coarse, double err_fine, double h_coarse, double h_fine) {
  TDNNS_REQUIRE(err_coarse > 0.0 && err_fine > 0.0, "errors must be positive");
  TDNNS_REQUIRE(h_coarse > h_fine && h_fine > 0.0, "mesh sizes must decrease");
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

// ------------------------------------------------------------------- export

namespace {
void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}
}  // namespace

void export_vtk(std::ostream& os, const Spaces& spaces, const SolutionFields& fields) {
  const TriMesh& mesh = *spaces.deflection.mesh;
  TDNNS_REQUIRE(static_cast<int>(fields.deflection.size()) == spaces.deflection.ndof,
                "deflection coefficient length mismatch");
  TDNNS_REQUIRE(static_cast<int>(fields.rotation.size()) == spaces.rotation.ndof,
                "rotation coefficient length mismatch");
  TDNNS_REQUIRE(static_cast<int>(fields.moment.size()) == spaces.moment.ndof,
                "moment coefficient length mismatch");
  const bool with_shear = fields.shear.size() == fields.rotation.size();

  os << "# vtk DataFile Version 3.0\n";
  os << "plate solution\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices) {
    put(os, v.x);
    os << ' ';
    put(os, v.y);
    os << " 0\n";
  }
  os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& tri : mesh.triangles)
    os << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  os << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) os << "5\n";

  // Deflection dofs at vertices come first in the nodal numbering.
  os << "POINT_DATA " << mesh.num_vertices() << '\n';
  os << "SCALARS deflection double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    put(os, fields.deflection[v]);
    os << '\n';
  }

  os << "CELL_DATA " << mesh.num_triangles() << '\n';
  os << "VECTORS rotation double\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 r = eval_vector(local_field(spaces.rotation, fields.rotation, t),
                               mesh.centroid(t));
    put(os, r.x);
    os << ' ';
    put(os, r.y);
    os << " 0\n";
  }
  const char* names[3] = {"moment_xx", "moment_yy", "moment_xy"};
  for (int c = 0; c < 3; ++c) {
    os << "SCALARS " << names[c] << " double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const Voigt m = eval_tensor(local_field(spaces.moment, fields.moment, t),
                                  mesh.centroid(t));
      put(os, m[c]);
      os << '\n';
    }
  }
  if (with_shear) {
    os << "VECTORS shear double\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const Vec2 s = eval_vector(local_field(spaces.rotation, fields.shear, t),
                                 mesh.centroid(t));
      put(os, s.x);
      os << ' ';
      put(os, s.y);
      os << " 0\n";
    }
  }
}

void export_vtk_file(const std::string& path, const Spaces& spaces,
                     const SolutionFields& fields) {
  std::ofstream os(path);
  TDNNS_REQUIRE(os.good(), "cannot open " + path + " for writing");
  export_vtk(os, spaces, fields);
  TDNNS_REQUIRE(os.good(), "write to " + path + " failed");
}

}  // namespace tdnns
