// Bending stiffness/compliance construction.
#include "tdnns/material.hpp"

#include <string>

namespace tdnns {

namespace {

Voigt mat_apply(const std::array<std::array<double, 3>, 3>& m, const Voigt& v) {
  Voigt r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

}  // namespace

Voigt BendingTensors::apply_stiffness(const Voigt& eps) const { return mat_apply(stiffness, eps); }

Voigt BendingTensors::apply_compliance(const Voigt& m) const { return mat_apply(compliance, m); }

BendingTensors make_bending_tensors(const MaterialParams& p) {
  TDNNS_REQUIRE(p.youngs_modulus > 0.0, "Young's modulus must be positive");
  TDNNS_REQUIRE(p.poisson_ratio >= 0.0 && p.poisson_ratio < 0.5,
                "Poisson ratio must lie in [0, 1/2)");
  TDNNS_REQUIRE(p.shear_correction > 0.0, "shear correction factor must be positive");

  const double E = p.youngs_modulus, nu = p.poisson_ratio;
  BendingTensors out;
  const double d = E / (12.0 * (1.0 - nu * nu));
  out.stiffness = {{{d, d * nu, 0.0}, {d * nu, d, 0.0}, {0.0, 0.0, d * (1.0 - nu) / 2.0}}};
  const double ia = 12.0 / E;
  out.compliance = {{{ia, -ia * nu, 0.0}, {-ia * nu, ia, 0.0}, {0.0, 0.0, ia * 2.0 * (1.0 + nu)}}};
  out.shear_modulus = p.shear_correction * E / (2.0 * (1.0 + nu));
  return out;
}

}  // namespace tdnns
