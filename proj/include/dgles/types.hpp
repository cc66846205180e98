#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace dgles {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Conservative variables [rho, rho*v1, rho*v2, rho*v3, rho*E] at one node.
using State = std::array<double, 5>;

inline constexpr int kNumVars = 5;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

inline State operator+(const State& a, const State& b) {
  State r;
  for (int v = 0; v < kNumVars; ++v) r[v] = a[v] + b[v];
  return r;
}

inline State operator-(const State& a, const State& b) {
  State r;
  for (int v = 0; v < kNumVars; ++v) r[v] = a[v] - b[v];
  return r;
}

inline State operator*(double s, const State& a) {
  State r;
  for (int v = 0; v < kNumVars; ++v) r[v] = s * a[v];
  return r;
}

}  // namespace dgles
