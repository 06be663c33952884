// Basic shared types: 2D vector arithmetic and precondition checking.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace tdnns {

/// Throws std::invalid_argument with location context.  Used by TDNNS_REQUIRE.
[[noreturn]] inline void require_failed(const char* file, int line, const std::string& what) {
  throw std::invalid_argument(std::string(file) + ":" + std::to_string(line) + ": " + what);
}

/// Precondition / consistency check; failures carry a descriptive message.
#define TDNNS_REQUIRE(cond, msg)                                   \
  do {                                                             \
    if (!(cond)) ::tdnns::require_failed(__FILE__, __LINE__, msg); \
  } while (0)

/// Plain 2D point / vector.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline Vec2 operator*(double a, const Vec2& v) { return {a * v.x, a * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }
/// Rotate by -90 degrees: maps a CCW boundary tangent to the outward normal.
inline Vec2 rot_minus90(const Vec2& v) { return {v.y, -v.x}; }
/// 2D cross product (z component of the 3D cross product).
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

}  // namespace tdnns
