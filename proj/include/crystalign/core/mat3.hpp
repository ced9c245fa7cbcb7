#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

namespace crystalign {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // row-major
using IVec3 = std::array<int, 3>;
using IMat3 = std::array<IVec3, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}
inline Vec3& operator-=(Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) a[i] -= b[i];
  return a;
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline constexpr Mat3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }
inline constexpr IMat3 iidentity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline double det(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}
inline int det(const IMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}
inline int trace(const IMat3& m) { return m[0][0] + m[1][1] + m[2][2]; }

inline Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}
inline IMat3 transpose(const IMat3& m) {
  IMat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}
inline IMat3 operator*(const IMat3& a, const IMat3& b) {
  IMat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}
inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}
inline IVec3 operator*(const IMat3& m, const IVec3& v) {
  IVec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}
inline Vec3 operator*(const IMat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

// Row vector times matrix: v^T m.
inline Vec3 row_times(const Vec3& v, const Mat3& m) {
  Vec3 r{};
  for (int j = 0; j < 3; ++j) r[j] = v[0] * m[0][j] + v[1] * m[1][j] + v[2] * m[2][j];
  return r;
}

inline Mat3 to_real(const IMat3& m) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = m[i][j];
  return r;
}

inline Mat3 inverse(const Mat3& m) {
  const double d = det(m);
  Mat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  return r;
}

// Inverse of a unimodular integer matrix (det = +-1).
inline IMat3 inverse_unimodular(const IMat3& m) {
  const int d = det(m);
  IMat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
  return r;
}

// Wrap a fractional coordinate into [0, 1).
inline double wrap01(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;
  if (w == 0.0) w = 0.0;  // drop negative zero
  return w;
}
inline Vec3 wrap01(const Vec3& v) { return {wrap01(v[0]), wrap01(v[1]), wrap01(v[2])}; }

// Nearest-integer difference: components in [-0.5, 0.5].
inline Vec3 wrap_centered(const Vec3& v) {
  return {v[0] - std::round(v[0]), v[1] - std::round(v[1]), v[2] - std::round(v[2])};
}

}  // namespace crystalign
