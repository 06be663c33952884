#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tdnns/quadrature.hpp"

using namespace tdnns;

namespace {

/// Exact integral of x^a y^b over the reference triangle {x,y >= 0, x+y <= 1}:
/// a! b! / (a+b+2)!.
double monomial_integral_triangle(int a, int b) {
  double v = 1.0;
  for (int i = 1; i <= a; ++i) v *= i;
  for (int i = 1; i <= b; ++i) v *= i;
  for (int i = 1; i <= a + b + 2; ++i) v /= i;
  return v;
}

double apply(const QuadRule& rule, int a, int b) {
  double sum = 0.0;
  for (int q = 0; q < rule.size(); ++q)
    sum += rule.weights[q] * std::pow(rule.points[q].x, a) * std::pow(rule.points[q].y, b);
  return sum;
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly up to their degree") {
  for (int degree = 0; degree <= kMaxQuadDegree; ++degree) {
    const QuadRule& rule = triangle_rule(degree);
    CHECK(rule.exactness >= degree);
    double wsum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= rule.exactness; ++a)
      for (int b = 0; a + b <= rule.exactness; ++b)
        CHECK(apply(rule, a, b) ==
              doctest::Approx(monomial_integral_triangle(a, b)).epsilon(1e-13));
  }
}

TEST_CASE("triangle rule points are interior") {
  for (int degree = 0; degree <= kMaxQuadDegree; ++degree) {
    const QuadRule& rule = triangle_rule(degree);
    for (const Vec2& p : rule.points) {
      CHECK(p.x > 0.0);
      CHECK(p.y > 0.0);
      CHECK(p.x + p.y < 1.0);
    }
  }
}

TEST_CASE("triangle rule is sharp: degree exactness+1 is not integrated exactly") {
  // One monomial above the stated exactness must show a visible error,
  // otherwise the stated exactness is too conservative.
  for (int degree = 1; degree <= kMaxQuadDegree; degree += 2) {
    const QuadRule& rule = triangle_rule(degree);
    const int a = rule.exactness + 1;
    const double err = std::abs(apply(rule, a, 0) - monomial_integral_triangle(a, 0));
    CHECK(err > 1e-10);
  }
}

TEST_CASE("segment rules integrate monomials exactly up to their degree") {
  for (int degree = 0; degree <= kMaxQuadDegree; ++degree) {
    const QuadRule& rule = segment_rule(degree);
    CHECK(rule.exactness >= degree);
    double wsum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int p = 0; p <= rule.exactness; ++p) {
      double sum = 0.0;
      for (int q = 0; q < rule.size(); ++q)
        sum += rule.weights[q] * std::pow(rule.points[q].x, p);
      CHECK(sum == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
    for (const Vec2& pt : rule.points) {
      CHECK(pt.x > 0.0);
      CHECK(pt.x < 1.0);
      CHECK(pt.y == 0.0);
    }
  }
}

TEST_CASE("rules reject degrees outside the stored range") {
  CHECK_THROWS_AS(triangle_rule(-1), std::invalid_argument);
  CHECK_THROWS_AS(triangle_rule(kMaxQuadDegree + 1), std::invalid_argument);
  CHECK_THROWS_AS(segment_rule(-1), std::invalid_argument);
  CHECK_THROWS_AS(segment_rule(kMaxQuadDegree + 1), std::invalid_argument);
}
