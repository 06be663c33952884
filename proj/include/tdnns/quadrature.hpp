// Gauss quadrature on the reference triangle and the unit segment.
#pragma once

#include <vector>

#include "tdnns/common.hpp"

namespace tdnns {

/// Quadrature rule on a reference domain.  For triangle rules the points are
/// (x,y) in the unit triangle {x,y >= 0, x+y <= 1} and the weights sum to 1/2;
/// for segment rules the points are (s,0) with s in [0,1] and weights sum to 1.
struct QuadRule {
  int exactness = 0;  ///< largest total polynomial degree integrated exactly
  std::vector<Vec2> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// Largest polynomial degree the stored rules can integrate exactly.
inline constexpr int kMaxQuadDegree = 13;

/// Interior-point rule on the reference triangle, exact for total degree
/// >= `degree` (conical product of Gauss-Legendre and Gauss-Jacobi rules,
/// m^2 points for exactness 2m-1).  Requires 0 <= degree <= kMaxQuadDegree.
const QuadRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1], exact for degree >= `degree`
/// (m points for exactness 2m-1).  Requires 0 <= degree <= kMaxQuadDegree.
const QuadRule& segment_rule(int degree);

}  // namespace tdnns
