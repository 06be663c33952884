// Built-in benchmark cases and convergence study runners.
#pragma once

#include <functional>
#include <vector>

#include "tdnns/assembly.hpp"

namespace tdnns {

/// Clamped unit square with a manufactured polynomial solution.  The rotation
/// is independent of the thickness; the deflection carries an O(t^2) shear
/// correction.  All boundary traces vanish, so the clamped data is zero.
/// Material is fixed at E = 12, nu = 0, shear correction 5/6 (mu = 5).
struct ClampedSquareCase {
  double thickness = 1e-3;
  MaterialParams material{12.0, 0.0, 5.0 / 6.0};

  std::function<double(Vec2)> load() const;
  std::function<double(Vec2)> exact_deflection() const;
  std::function<Vec2(Vec2)> exact_rotation() const;
  BCSpec bc() const;

  /// Problem bound to a mesh (which must carry marker 1 on the boundary).
  PlateProblem problem(const TriMesh& mesh, int order, bool hybrid = true) const;
};

/// Square plate with a circular hole: clamped left edge, linearly varying
/// transverse edge force on the right edge, free top/bottom and hole rim.
struct PlateWithHoleCase {
  double side = 100.0;
  double hole_diameter = 20.0;
  double thickness = 1.0;
  MaterialParams material{2.1e5, 0.3, 5.0 / 6.0};

  TriMesh mesh(int segments, int graded_levels = 0) const;
  std::function<double(Vec2)> edge_force() const;  ///< on the right edge
  BCSpec bc() const;
  PlateProblem problem(const TriMesh& mesh, int order, bool hybrid = true) const;
};

/// One row of a convergence study.
struct StudyLevel {
  int level = 0;
  int n = 0;  ///< squares per side (clamped square), 0 otherwise
  double h = 0.0;
  int ndof_total = 0;   ///< free dofs of the coupled system before condensation
  int ndof_solved = 0;  ///< unknowns of the linear system actually solved
  double err_deflection = 0.0;
  double err_rotation = 0.0;
  double rate_deflection = 0.0;  ///< vs previous level, 0 on the first
  double rate_rotation = 0.0;
  double shear_residual = 0.0;
  double solve_seconds = 0.0;
};

struct StudyOptions {
  int order = 1;
  bool hybrid = true;  ///< condensed solve; monolithic dense otherwise
  SolveOptions solver;
  int threads = 1;
  bool with_shear_residual = false;
};

/// Solves the clamped square case on unit_square_mesh(n) for each n and
/// measures errors against the exact solution.
std::vector<StudyLevel> convergence_study(const ClampedSquareCase& c, const std::vector<int>& ns,
                                          const StudyOptions& opts);

/// Solves `levels` uniform refinements of `base` plus one extra reference
/// level; errors are distances to the reference solution.  `bind` attaches
/// boundary conditions, material, and load to each mesh.
std::vector<StudyLevel> reference_study(const TriMesh& base,
                                        const std::function<PlateProblem(const TriMesh&)>& bind,
                                        int levels, const StudyOptions& opts);

}  // namespace tdnns
