// Benchmark case definitions and study runners.
#include "tdnns/presets.hpp"

#include <chrono>
#include <cmath>

#include "tdnns/postprocess.hpp"

namespace tdnns {

namespace {
// Building blocks of the manufactured solution.
double cube_bubble(double s) {  // s^3 (s-1)^3
  const double a = s * (s - 1.0);
  return a * a * a;
}
double cube_bubble_d1(double s) {  // s^2 (s-1)^2 (2s-1) = (d/ds cube_bubble)/3
  const double a = s * (s - 1.0);
  return a * a * (2.0 * s - 1.0);
}
double shear_profile(double s) {  // s (s-1) (5 s^2 - 5 s + 1)
  return s * (s - 1.0) * (5.0 * s * s - 5.0 * s + 1.0);
}
}  // namespace

std::function<double(Vec2)> ClampedSquareCase::load() const {
  const double e_factor = material.youngs_modulus / (1.0 - material.poisson_ratio * material.poisson_ratio);
  return [e_factor](Vec2 p) {
    const double x = p.x, y = p.y;
    const double px = 5.0 * x * x - 5.0 * x + 1.0;
    const double py = 5.0 * y * y - 5.0 * y + 1.0;
    const double bx = x * (x - 1.0), by = y * (y - 1.0);
    return e_factor * (by * px * (2.0 * by * by + bx * py) +
                       bx * py * (2.0 * bx * bx + by * px));
  };
}

std::function<double(Vec2)> ClampedSquareCase::exact_deflection() const {
  const double t2 = thickness * thickness;
  const double shear_coef = 2.0 * t2 / (5.0 * (1.0 - material.poisson_ratio));
  return [shear_coef](Vec2 p) {
    return cube_bubble(p.x) * cube_bubble(p.y) / 3.0 -
           shear_coef *
               (cube_bubble(p.y) * shear_profile(p.x) + cube_bubble(p.x) * shear_profile(p.y));
  };
}

std::function<Vec2(Vec2)> ClampedSquareCase::exact_rotation() const {
  return [](Vec2 p) {
    return Vec2{cube_bubble(p.y) * cube_bubble_d1(p.x), cube_bubble(p.x) * cube_bubble_d1(p.y)};
  };
}

BCSpec ClampedSquareCase::bc() const {
  BoundaryCondition clamped;
  clamped.essential_deflection = true;
  clamped.essential_rotation = true;
  BCSpec spec;
  spec.markers[1] = clamped;
  return spec;
}

PlateProblem ClampedSquareCase::problem(const TriMesh& mesh, int order, bool hybrid) const {
  PlateProblem p;
  p.mesh = &mesh;
  p.order = order;
  p.hybrid = hybrid;
  p.material = material;
  p.thickness = thickness;
  p.load = load();
  p.bc = bc();
  return p;
}

// ---------------------------------------------------------- plate with hole

TriMesh PlateWithHoleCase::mesh(int segments, int graded_levels) const {
  return plate_with_hole_mesh(side, hole_diameter, segments, graded_levels);
}

std::function<double(Vec2)> PlateWithHoleCase::edge_force() const {
  const double mid = 0.5 * side;
  return [mid](Vec2 p) { return 0.1 * (p.y - mid); };
}

BCSpec PlateWithHoleCase::bc() const {
  BoundaryCondition clamped;
  clamped.essential_deflection = true;
  clamped.essential_rotation = true;
  BoundaryCondition traction;
  traction.essential_moment = true;
  traction.edge_force = edge_force();
  BoundaryCondition free_edge;
  free_edge.essential_moment = true;
  BCSpec spec;
  spec.markers[1] = clamped;    // left
  spec.markers[2] = traction;   // right
  spec.markers[3] = free_edge;  // top and bottom
  spec.markers[4] = free_edge;  // hole rim
  return spec;
}

PlateProblem PlateWithHoleCase::problem(const TriMesh& mesh, int order, bool hybrid) const {
  PlateProblem p;
  p.mesh = &mesh;
  p.order = order;
  p.hybrid = hybrid;
  p.material = material;
  p.thickness = thickness;
  p.bc = bc();
  return p;
}

// -------------------------------------------------------------- study runs

namespace {

SolutionFields timed_solve(const PlateProblem& problem, const StudyOptions& opts,
                           double* seconds) {
  const auto start = std::chrono::steady_clock::now();
  SolutionFields f =
      problem.hybrid ? solve_condensed(problem, opts.solver) : solve_monolithic(problem);
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return f;
}

int count_free_dofs(const Spaces& spaces, const BCSpec& bc) {
  int n = essential_moment(spaces.moment, bc).free_count() +
          essential_rotation(spaces.rotation, bc).free_count() +
          essential_deflection(spaces.deflection, bc).free_count();
  if (spaces.hybrid) n += essential_multiplier(spaces.multiplier, bc).free_count();
  return n;
}

void fill_rates(std::vector<StudyLevel>& rows) {
  for (size_t i = 1; i < rows.size(); ++i) {
    rows[i].rate_deflection = convergence_rate(rows[i - 1].err_deflection, rows[i].err_deflection,
                                               rows[i - 1].h, rows[i].h);
    rows[i].rate_rotation = convergence_rate(rows[i - 1].err_rotation, rows[i].err_rotation,
                                             rows[i - 1].h, rows[i].h);
  }
}

}  // namespace

std::vector<StudyLevel> convergence_study(const ClampedSquareCase& c, const std::vector<int>& ns,
                                          const StudyOptions& opts) {
  TDNNS_REQUIRE(!ns.empty(), "study needs at least one mesh");
  std::vector<StudyLevel> rows;
  const auto exact_w = c.exact_deflection();
  const auto exact_th = c.exact_rotation();
  for (size_t i = 0; i < ns.size(); ++i) {
    const TriMesh mesh = unit_square_mesh(ns[i]);
    PlateProblem problem = c.problem(mesh, opts.order, opts.hybrid);
    problem.threads = opts.threads;
    StudyLevel row;
    row.level = static_cast<int>(i);
    row.n = ns[i];
    row.h = mesh.max_edge_length();
    const SolutionFields fields = timed_solve(problem, opts, &row.solve_seconds);
    row.ndof_solved = fields.n_free;
    const Spaces spaces = make_spaces(mesh, opts.order, opts.hybrid);
    row.ndof_total = count_free_dofs(spaces, problem.bc);
    row.err_deflection = l2_error(spaces.deflection, fields.deflection, exact_w);
    row.err_rotation = l2_error(spaces.rotation, fields.rotation, exact_th);
    if (opts.with_shear_residual) row.shear_residual = shear_residual(problem, fields).residual;
    rows.push_back(row);
  }
  fill_rates(rows);
  return rows;
}

std::vector<StudyLevel> reference_study(const TriMesh& base,
                                        const std::function<PlateProblem(const TriMesh&)>& bind,
                                        int levels, const StudyOptions& opts) {
  TDNNS_REQUIRE(levels >= 1, "study needs at least one level");
  std::vector<TriMesh> meshes;
  meshes.reserve(levels + 1);
  meshes.push_back(base);
  for (int i = 0; i < levels; ++i) meshes.push_back(refine_uniform(meshes.back()));

  std::vector<SolutionFields> solutions(levels + 1);
  std::vector<StudyLevel> rows(levels);
  for (int i = 0; i <= levels; ++i) {
    PlateProblem problem = bind(meshes[i]);
    problem.order = opts.order;
    problem.hybrid = opts.hybrid;
    problem.threads = opts.threads;
    double seconds = 0.0;
    solutions[i] = timed_solve(problem, opts, &seconds);
    if (i < levels) {
      rows[i].level = i;
      rows[i].h = meshes[i].max_edge_length();
      rows[i].ndof_solved = solutions[i].n_free;
      rows[i].ndof_total =
          count_free_dofs(make_spaces(meshes[i], opts.order, opts.hybrid), problem.bc);
      rows[i].solve_seconds = seconds;
      if (opts.with_shear_residual)
        rows[i].shear_residual = shear_residual(problem, solutions[i]).residual;
    }
  }

  const Spaces ref_spaces = make_spaces(meshes[levels], opts.order, opts.hybrid);
  for (int i = 0; i < levels; ++i) {
    const Spaces spaces = make_spaces(meshes[i], opts.order, opts.hybrid);
    rows[i].err_deflection =
        l2_difference(ref_spaces.deflection, solutions[levels].deflection, spaces.deflection,
                      solutions[i].deflection, levels - i);
    rows[i].err_rotation = l2_difference(ref_spaces.rotation, solutions[levels].rotation,
                                         spaces.rotation, solutions[i].rotation, levels - i);
  }
  fill_rates(rows);
  return rows;
}

}  // namespace tdnns
