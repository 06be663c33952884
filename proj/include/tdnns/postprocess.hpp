// L2 error measurement, convergence rates, and VTK export.
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdnns/assembly.hpp"
#include "tdnns/fespace.hpp"

namespace tdnns {

/// Default quadrature degree for error norms of a space of the given order:
/// min(max(2 (order + 2), order + 4), kMaxQuadDegree).
int error_quadrature_degree(int order);

/// L2 distance between a finite element field and a reference closure; a null
/// closure measures the plain L2 norm.  `degree` < 0 selects the default.
double l2_error(const FESpace& space, const std::vector<double>& coeffs,
                const std::function<double(Vec2)>& exact, int degree = -1);
double l2_error(const FESpace& space, const std::vector<double>& coeffs,
                const std::function<Vec2(Vec2)>& exact, int degree = -1);

/// L2 distance between fields on a mesh and its `depth`-fold uniform
/// refinement, integrated on the fine mesh.  Relies on the refinement child
/// ordering: fine element t descends from coarse element t / 4^depth.
double l2_difference(const FESpace& fine_space, const std::vector<double>& fine_coeffs,
                     const FESpace& coarse_space, const std::vector<double>& coarse_coeffs,
                     int depth, int degree = -1);

/// Observed order of convergence between two consecutive errors.
double convergence_rate(double err_coarse, double err_fine, double h_coarse, double h_fine);

/// Legacy ASCII VTK unstructured grid: deflection as vertex data, rotation,
/// moment components, and shear (when present) as cell data at centroids.
void export_vtk(std::ostream& os, const Spaces& spaces, const SolutionFields& fields);
void export_vtk_file(const std::string& path, const Spaces& spaces, const SolutionFields& fields);

}  // namespace tdnns
