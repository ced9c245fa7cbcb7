#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "crystalign/core/error.hpp"
#include "crystalign/core/mat3.hpp"

namespace crystalign {

// x -> rotation * x + translation, acting on fractional column vectors.
struct SymmetryOp {
  IMat3 rotation = iidentity3();
  Vec3 translation{0, 0, 0};
};

inline SymmetryOp compose(const SymmetryOp& a, const SymmetryOp& b) {
  return {a.rotation * b.rotation, wrap01(a.rotation * b.translation + a.translation)};
}

inline Vec3 apply(const SymmetryOp& op, const Vec3& x) { return op.rotation * x + op.translation; }

// Translation difference reduced to the nearest lattice vector.
inline double translation_distance(const Vec3& a, const Vec3& b) {
  const Vec3 d = wrap_centered(a - b);
  return std::max({std::fabs(d[0]), std::fabs(d[1]), std::fabs(d[2])});
}

inline IMat3 adjugate(const IMat3& m) {
  IMat3 r{};
  r[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  r[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
  r[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  r[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  r[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
  r[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
  r[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  r[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
  r[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return r;
}

// Parses a coordinate triplet such as "-x+y+2/3,-x,z+1/6".
inline SymmetryOp parse_triplet(std::string_view text) {
  SymmetryOp op;
  op.rotation = IMat3{};
  int row = 0;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw ConfigError("bad symmetry operation '" + std::string(text) + "': " + why);
  };
  while (row < 3) {
    int sign = 1;
    bool any = false;
    while (i < text.size() && text[i] != ',') {
      const char c = text[i];
      if (c == ' ') {
        ++i;
      } else if (c == '+' || c == '-') {
        sign = c == '-' ? -1 : 1;
        ++i;
      } else if (c == 'x' || c == 'y' || c == 'z') {
        op.rotation[row][c - 'x'] += sign;
        sign = 1;
        any = true;
        ++i;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        int num = 0, den = 1;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) num = num * 10 + (text[i++] - '0');
        if (i < text.size() && text[i] == '/') {
          ++i;
          den = 0;
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) den = den * 10 + (text[i++] - '0');
          if (den == 0) fail("zero denominator");
        }
        op.translation[row] += sign * static_cast<double>(num) / den;
        sign = 1;
        any = true;
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
    }
    if (!any) fail("empty component");
    ++row;
    if (row < 3) {
      if (i >= text.size()) fail("expected three components");
      ++i;
    }
  }
  if (i != text.size()) fail("trailing text");
  const int d = det(op.rotation);
  if (d != 1 && d != -1) fail("rotation is not unimodular");
  op.translation = wrap01(op.translation);
  return op;
}

}  // namespace crystalign
