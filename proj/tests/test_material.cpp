#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tdnns/material.hpp"

using namespace tdnns;

TEST_CASE("reference material: E=12, nu=0, ks=5/6") {
  const BendingTensors bt = make_bending_tensors({12.0, 0.0, 5.0 / 6.0});
  // C = E/12 * diag(1, 1, 1/2) = diag(1, 1, 0.5) at nu = 0.
  CHECK(bt.stiffness[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bt.stiffness[1][1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bt.stiffness[2][2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bt.stiffness[0][1] == 0.0);
  CHECK(bt.compliance[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bt.compliance[2][2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(bt.shear_modulus == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("stiffness and compliance are mutual inverses") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MaterialParams p;
    p.youngs_modulus = std::exp(unif(gen) * 5.0);   // spread over orders of magnitude
    p.poisson_ratio = 0.245 * (unif(gen) + 1.0);    // [0, 0.49)
    p.shear_correction = 0.5 + 0.5 * (unif(gen) + 1.0);
    const BendingTensors bt = make_bending_tensors(p);
    const Voigt m{unif(gen), unif(gen), unif(gen)};
    const Voigt round = bt.apply_stiffness(bt.apply_compliance(m));
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    for (int c = 0; c < 3; ++c) CHECK(std::abs(round[c] - m[c]) <= 1e-13 * scale);

    // mu = ks E / (2 (1 + nu))
    const double mu = p.shear_correction * p.youngs_modulus / (2.0 * (1.0 + p.poisson_ratio));
    CHECK(bt.shear_modulus == doctest::Approx(mu).epsilon(1e-14));
  }
}

TEST_CASE("compliance energy is positive") {
  const BendingTensors bt = make_bending_tensors({210000.0, 0.3, 5.0 / 6.0});
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Voigt m{unif(gen), unif(gen), unif(gen)};
    if (std::abs(m[0]) + std::abs(m[1]) + std::abs(m[2]) < 1e-3) continue;
    // A m is strain-like (engineering xy), so the contraction with the
    // stress-like m is the plain dot -- the factor 2 already sits in A m.
    const Voigt am = bt.apply_compliance(m);
    CHECK(am[0] * m[0] + am[1] * m[1] + am[2] * m[2] > 0.0);
  }
}

TEST_CASE("voigt_ddot doubles the shear component") {
  const Voigt a{1.0, 2.0, 3.0};
  const Voigt b{4.0, 5.0, 6.0};
  CHECK(voigt_ddot(a, b) == doctest::Approx(4.0 + 10.0 + 2.0 * 18.0));
}

TEST_CASE("invalid material parameters are rejected") {
  CHECK_THROWS_AS(make_bending_tensors({0.0, 0.0, 5.0 / 6.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_bending_tensors({-1.0, 0.0, 5.0 / 6.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_bending_tensors({12.0, -0.1, 5.0 / 6.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_bending_tensors({12.0, 0.5, 5.0 / 6.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_bending_tensors({12.0, 0.0, 0.0}), std::invalid_argument);
}
