#pragma once

#include <cmath>
#include <complex>

namespace couette_ep {

using Complex = std::complex<double>;

/// Real 2-vector.
struct Vec2 {
  double x0 = 0.0, x1 = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x0 + b.x0, a.x1 + b.x1}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x0 - b.x0, a.x1 - b.x1}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x0, s * v.x1}; }

/// Real 2x2 matrix, row major.
struct Mat2 {
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  double det() const { return a00 * a11 - a01 * a10; }
  double trace() const { return a00 + a11; }
  /// Adjugate: adj(M) * M = det(M) * I. Exact inverse for det = 1.
  Mat2 adjugate() const { return {a11, -a01, -a10, a00}; }
  double norm_inf() const {
    return std::max(std::abs(a00) + std::abs(a01), std::abs(a10) + std::abs(a11));
  }
};

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a00 + b.a00, a.a01 + b.a01, a.a10 + b.a10, a.a11 + b.a11};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11};
}
inline Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a00, s * m.a01, s * m.a10, s * m.a11};
}
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a00 * b.a00 + a.a01 * b.a10, a.a00 * b.a01 + a.a01 * b.a11,
          a.a10 * b.a00 + a.a11 * b.a10, a.a10 * b.a01 + a.a11 * b.a11};
}
inline Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a00 * v.x0 + m.a01 * v.x1, m.a10 * v.x0 + m.a11 * v.x1};
}

}  // namespace couette_ep
