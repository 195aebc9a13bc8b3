#pragma once

#include <cmath>
#include <numbers>

namespace pressmap {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x{};
  double y{};

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return s * v; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }

/// Wraps any finite angle into [0, 2π).
inline double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2π
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Unit vector for compass direction k of 8, counterclockwise from +x.
inline Vec2 direction8(int k) {
  const double angle = kTwoPi * k / 8.0;
  return {std::cos(angle), std::sin(angle)};
}

struct PitchSpec {
  double length = 105.0;
  double width = 68.0;

  double diagonal() const { return std::hypot(length, width); }
  friend bool operator==(const PitchSpec&, const PitchSpec&) = default;
};

}  // namespace pressmap
