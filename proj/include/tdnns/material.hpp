// Plate material law: bending stiffness/compliance and shear modulus.
#pragma once

#include <array>

#include "tdnns/common.hpp"

namespace tdnns {

/// Symmetric 2x2 tensors in Voigt order (xx, yy, xy).  Strain-like quantities
/// use the engineering convention (third component doubled), so the full
/// contraction of two stress-like tensors a : b carries a factor 2 on xy.
using Voigt = std::array<double, 3>;

/// Full contraction a : b of two stress-like Voigt tensors.
inline double voigt_ddot(const Voigt& a, const Voigt& b) {
  return a[0] * b[0] + a[1] * b[1] + 2.0 * a[2] * b[2];
}

struct MaterialParams {
  double youngs_modulus = 12.0;
  double poisson_ratio = 0.0;
  double shear_correction = 5.0 / 6.0;
};

/// Plane bending tensors for an isotropic plate (per unit thickness cubed;
/// the thickness scaling lives in the variational forms, not here).
struct BendingTensors {
  std::array<std::array<double, 3>, 3> stiffness{};   ///< C, acts on strain-like Voigt
  std::array<std::array<double, 3>, 3> compliance{};  ///< A = C^{-1}, acts on stress-like Voigt
  double shear_modulus = 0.0;                         ///< mu = ks E / (2 (1 + nu))

  /// M = C eps with eps strain-like (engineering xy); M is stress-like.
  Voigt apply_stiffness(const Voigt& eps) const;
  /// eps = A M with M stress-like; result is strain-like (engineering xy).
  Voigt apply_compliance(const Voigt& m) const;
};

/// Builds C = E / (12 (1 - nu^2)) * [[1, nu, 0], [nu, 1, 0], [0, 0, (1-nu)/2]]
/// and its inverse.  Requires E > 0, 0 <= nu < 1/2, ks > 0.
BendingTensors make_bending_tensors(const MaterialParams& p);

}  // namespace tdnns
