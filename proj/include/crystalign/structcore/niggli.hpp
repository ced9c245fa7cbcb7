#pragma once

#include <cmath>

#include "crystalign/core/error.hpp"
#include "crystalign/core/mat3.hpp"
#include "crystalign/structcore/lattice.hpp"

namespace crystalign {

struct NiggliResult {
  Mat3 basis;       // reduced lattice vectors as rows
  IMat3 transform;  // basis = transform * original rows, det = +1
};

// Krivy-Gruber reduction with the epsilon handling of Grosse-Kunstleve et al.
// Works directly on the basis vectors so the integer change of basis is
// available to callers that need to carry fractional coordinates along.
//
// `rel_eps` is scaled by V^(2/3) to obtain the comparison tolerance.
inline NiggliResult niggli_reduce_basis(const Mat3& rows, double rel_eps = 1e-5, int max_iter = 1000) {
  Mat3 b = rows;
  IMat3 t = iidentity3();
  const double volume = std::fabs(det(rows));
  if (!(volume > 0.0)) throw ReductionError("cannot reduce a degenerate basis");
  const double eps = rel_eps * std::cbrt(volume * volume);

  auto apply = [&](const IMat3& m) {
    Mat3 nb{};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        if (m[i][k] != 0) nb[i] += static_cast<double>(m[i][k]) * b[k];
    b = nb;
    t = m * t;
  };
  auto sgn = [&](double x) { return x < -eps ? -1 : (x > eps ? 1 : 0); };

  for (int iter = 0; iter < max_iter; ++iter) {
    const double A = dot(b[0], b[0]), B = dot(b[1], b[1]), C = dot(b[2], b[2]);
    const double xi = 2 * dot(b[1], b[2]), eta = 2 * dot(b[0], b[2]), zeta = 2 * dot(b[0], b[1]);

    // A1
    if (A > B + eps || (std::fabs(A - B) <= eps && std::fabs(xi) > std::fabs(eta) + eps)) {
      apply({{{0, -1, 0}, {-1, 0, 0}, {0, 0, -1}}});
      continue;
    }
    // A2
    if (B > C + eps || (std::fabs(B - C) <= eps && std::fabs(eta) > std::fabs(zeta) + eps)) {
      apply({{{-1, 0, 0}, {0, 0, -1}, {0, -1, 0}}});
      continue;
    }
    const int l = sgn(xi), m = sgn(eta), n = sgn(zeta);
    // A3 / A4: make the three off-diagonal terms all positive or all non-positive.
    if (l * m * n == 1) {
      const int i = l == -1 ? -1 : 1, j = m == -1 ? -1 : 1, k = n == -1 ? -1 : 1;
      if (i != 1 || j != 1 || k != 1) apply({{{i, 0, 0}, {0, j, 0}, {0, 0, k}}});
    } else if (!(l == -1 && m == -1 && n == -1)) {
      int i = 1, j = 1, k = 1;
      int* zero = nullptr;
      if (l == 1) i = -1; else if (l == 0) zero = &i;
      if (m == 1) j = -1; else if (m == 0) zero = &j;
      if (n == 1) k = -1; else if (n == 0) zero = &k;
      if (i * j * k == -1 && zero) *zero = -1;
      if (i * j * k == 1 && (i != 1 || j != 1 || k != 1)) apply({{{i, 0, 0}, {0, j, 0}, {0, 0, k}}});
    }
    {
      const double xi2 = 2 * dot(b[1], b[2]), eta2 = 2 * dot(b[0], b[2]), zeta2 = 2 * dot(b[0], b[1]);
      const double A2 = dot(b[0], b[0]), B2 = dot(b[1], b[1]);
      // A5
      if (std::fabs(xi2) > B2 + eps || (std::fabs(xi2 - B2) <= eps && 2 * eta2 < zeta2 - eps) ||
          (std::fabs(xi2 + B2) <= eps && zeta2 < -eps)) {
        const int s = xi2 > 0 ? 1 : -1;
        apply({{{1, 0, 0}, {0, 1, 0}, {0, -s, 1}}});
        continue;
      }
      // A6
      if (std::fabs(eta2) > A2 + eps || (std::fabs(eta2 - A2) <= eps && 2 * xi2 < zeta2 - eps) ||
          (std::fabs(eta2 + A2) <= eps && zeta2 < -eps)) {
        const int s = eta2 > 0 ? 1 : -1;
        apply({{{1, 0, 0}, {0, 1, 0}, {-s, 0, 1}}});
        continue;
      }
      // A7
      if (std::fabs(zeta2) > A2 + eps || (std::fabs(zeta2 - A2) <= eps && 2 * xi2 < eta2 - eps) ||
          (std::fabs(zeta2 + A2) <= eps && eta2 < -eps)) {
        const int s = zeta2 > 0 ? 1 : -1;
        apply({{{1, 0, 0}, {-s, 1, 0}, {0, 0, 1}}});
        continue;
      }
      // A8
      const double sum = xi2 + eta2 + zeta2 + A2 + B2;
      if (sum < -eps || (std::fabs(sum) <= eps && 2 * (A2 + eta2) + zeta2 > eps)) {
        apply({{{1, 0, 0}, {0, 1, 0}, {1, 1, 1}}});
        continue;
      }
    }
    return {b, t};
  }
  throw ReductionError("Niggli reduction did not converge in " + std::to_string(max_iter) + " iterations");
}

inline Lattice niggli_reduce(const Lattice& lattice, double rel_eps = 1e-5) {
  return Lattice::from_vectors(niggli_reduce_basis(lattice.matrix(), rel_eps).basis);
}

}  // namespace crystalign
