// Finite element spaces for the mixed plate system.
//
// Four spaces over a common triangle mesh:
//  - Deflection: continuous Lagrange elements of order m (nodal dofs at
//    vertices, edge nodes, and interior lattice nodes);
//  - Rotation: vector-valued elements, locally full [P^k]^2, with tangential
//    continuity across edges (edge dofs are moments of the tangential trace
//    against orthonormal Legendre polynomials, interior dofs are moments
//    against an orthonormal bubble basis);
//  - Moment: symmetric-tensor-valued elements, locally P^k per component,
//    with normal-normal continuity (edge dofs are moments of the nn-trace);
//    optionally "broken", i.e. fully discontinuous, for hybridization;
//  - Multiplier: scalar polynomials of order k living on mesh edges only,
//    the hybrid Lagrange multiplier restoring nn-continuity.
//
// All edge dofs are defined with respect to the global edge orientation
// (lower vertex index -> higher), so shared dofs need no sign flips.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tdnns/material.hpp"
#include "tdnns/mesh.hpp"
#include "tdnns/quadrature.hpp"

namespace tdnns {

/// Unit tangent of global edge e, pointing from lower to higher vertex index.
inline Vec2 edge_tangent(const TriMesh& m, int e) {
  const Vec2 d = m.vertices[m.edges[e][1]] - m.vertices[m.edges[e][0]];
  return (1.0 / norm(d)) * d;
}
/// Unit normal of global edge e (global tangent rotated by -90 degrees).
inline Vec2 edge_normal(const TriMesh& m, int e) { return rot_minus90(edge_tangent(m, e)); }

/// Orthonormal Legendre polynomial q_r on [0,1] (L2-normalized), r in [0,4].
double legendre01(int r, double s);

enum class SpaceKind { Deflection, Rotation, Moment, Multiplier };

struct FESpace {
  SpaceKind kind = SpaceKind::Deflection;
  int order = 1;        ///< local polynomial order
  bool broken = false;  ///< Moment only: fully discontinuous variant
  const TriMesh* mesh = nullptr;

  int ndof = 0;
  int dofs_per_vertex = 0;    ///< 1 for Deflection, else 0
  int dofs_per_edge = 0;      ///< conforming / multiplier edge block size
  int dofs_per_interior = 0;  ///< interior (single-element) block size
  int dofs_per_element = 0;   ///< broken spaces: full element block size
  int edge_offset = 0;        ///< start of the edge dof block
  int interior_offset = 0;    ///< start of the interior dof block

  int num_components() const;  ///< 1 scalar, 2 vector, 3 symmetric tensor (Voigt)
  /// Global dofs of element t in the local reference order: for Deflection
  /// vertices, then per local edge, then interior; for Rotation/Moment per
  /// local edge, then interior; for Multiplier per local edge.  Edge blocks
  /// follow the global edge orientation.
  std::vector<int> element_dofs(int t) const;
  /// Global dofs supported on edge e (edge block only; broken spaces have none).
  std::vector<int> edge_dofs(int e) const;
  /// Global dofs supported only on element t (interior block; for broken
  /// spaces the whole element block).
  std::vector<int> interior_dofs(int t) const;
};

FESpace build_space(const TriMesh& mesh, SpaceKind kind, int order, bool broken = false);

/// Shape function tables of one element at volume and edge quadrature points.
/// All values are physical: positions, weights (summing to area / edge
/// length), derivatives.  Vector and tensor traces are expressed in the
/// element-side frame (outward normal, CCW tangent).
struct ElementShapes {
  int element = -1;
  int nloc = 0;
  int ncomp = 1;
  std::vector<int> dofs;

  // Volume tables (empty for Multiplier spaces).
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::vector<double> value_tab;  ///< (q*nloc + i)*ncomp + c
  std::vector<double> grad_tab;   ///< scalar: (q*nloc + i)*2 + d
  std::vector<double> eps_tab;    ///< vector: engineering Voigt, (q*nloc + i)*3 + c
  std::vector<double> div_tab;    ///< tensor: row divergence, (q*nloc + i)*2 + d

  struct EdgeTrace {
    int edge = -1;       ///< global edge id
    double length = 0.0;
    double s_sign = 1.0;  ///< dot(CCW tangent, global tangent) = +-1
    Vec2 normal;          ///< outward unit normal of the element
    Vec2 tangent;         ///< CCW unit tangent
    std::vector<double> s;        ///< global edge parameters of quadrature points
    std::vector<Vec2> points;     ///< physical positions
    std::vector<double> weights;  ///< physical arc-length weights
    // Per point q and local shape i, flattened q*nloc + i:
    std::vector<double> value_n;  ///< scalar value | vector v.n | tensor n'(tau)n
    std::vector<double> value_t;  ///< vector v.t | tensor t'(tau)n; unused for scalars
    std::vector<double> grad_n;   ///< scalar: normal derivative
    std::vector<double> grad_t;   ///< scalar: tangential derivative (along `tangent`)
  };
  std::array<EdgeTrace, 3> edge;

  double value(int q, int i, int c = 0) const { return value_tab[(q * nloc + i) * ncomp + c]; }
  Vec2 grad(int q, int i) const {
    return {grad_tab[(q * nloc + i) * 2], grad_tab[(q * nloc + i) * 2 + 1]};
  }
  Voigt eps(int q, int i) const {
    const double* p = &eps_tab[(q * nloc + i) * 3];
    return {p[0], p[1], p[2]};
  }
  Vec2 div(int q, int i) const {
    return {div_tab[(q * nloc + i) * 2], div_tab[(q * nloc + i) * 2 + 1]};
  }
};

/// Tabulates shapes of element t at a volume rule exact to `vol_degree` and
/// edge rules exact to `edge_degree` (on every edge).
ElementShapes element_shapes(const FESpace& space, int t, int vol_degree, int edge_degree);

/// Polynomial representation of a finite element field on one element,
/// for evaluation at arbitrary points.  Monomials are in centered scaled
/// coordinates u = (x - center)/scale, ordered by total degree.
struct LocalPoly {
  Vec2 center;
  double scale = 1.0;
  int degree = 0;
  int ncomp = 1;
  std::vector<double> coeff;  ///< j*ncomp + c over monomials j
};

/// Extracts the local polynomial of a coefficient vector on element t.
LocalPoly local_field(const FESpace& space, const std::vector<double>& coeffs, int t);
double eval_scalar(const LocalPoly& p, Vec2 x);
Vec2 eval_vector(const LocalPoly& p, Vec2 x);
Voigt eval_tensor(const LocalPoly& p, Vec2 x);

/// Applies the dof functionals of the space to a smooth field (the canonical
/// interpolation operator).  Exactly one closure matching the space's
/// component count must be supplied; Multiplier spaces take the scalar form.
std::vector<double> interpolate(const FESpace& space, const std::function<double(Vec2)>& f);
std::vector<double> interpolate(const FESpace& space, const std::function<Vec2(Vec2)>& f);
std::vector<double> interpolate(const FESpace& space, const std::function<Voigt(Vec2)>& f);

/// Interpolates the gradient of a deflection field into the rotation space.
/// Requires rotation.order + 1 == deflection.order (then the gradient lies in
/// the rotation space and the interpolation is exact, element by element).
std::vector<double> interpolate_gradient(const FESpace& deflection,
                                         const FESpace& rotation,
                                         const std::vector<double>& w_coeffs);

}  // namespace tdnns
