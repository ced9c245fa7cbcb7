#pragma once

// Small exact integer-lattice helpers used by space-group identification.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "crystalign/core/mat3.hpp"

namespace crystalign::lattice_math {

inline IVec3 primitive_vector(IVec3 v) {
  const int g = std::gcd(std::gcd(std::abs(v[0]), std::abs(v[1])), std::abs(v[2]));
  if (g > 1)
    for (auto& x : v) x /= g;
  return v;
}

inline IVec3 icross(const IVec3& a, const IVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline bool is_zero(const IVec3& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

// Primitive integer vector spanning the eigenvalue-1 line of a proper
// rotation matrix that is not the identity.
inline IVec3 rotation_axis(const IMat3& r) {
  IMat3 m = r;
  for (int i = 0; i < 3; ++i) m[i][i] -= 1;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const IVec3 c = icross(m[a], m[b]);
      if (!is_zero(c)) {
        IVec3 p = primitive_vector(c);
        // Canonical sign: first non-zero component positive.
        for (int k = 0; k < 3; ++k)
          if (p[k] != 0) {
            if (p[k] < 0)
              for (auto& x : p) x = -x;
            break;
          }
        return p;
      }
    }
  return {0, 0, 0};
}

inline int rotation_order(const IMat3& r) {
  IMat3 m = r;
  for (int n = 1; n <= 6; ++n) {
    if (m == iidentity3()) return n;
    m = m * r;
  }
  return 0;  // not a crystallographic rotation
}

inline IMat3 negate(IMat3 m) {
  for (auto& row : m)
    for (auto& x : row) x = -x;
  return m;
}

// Non-zero diagonal entries of the Smith normal form of a 3 x k integer
// matrix given as k column vectors. Their product is the index of the
// generated lattice inside its saturation; their count is the rank.
inline std::vector<long> smith_invariants(const std::vector<IVec3>& columns) {
  const std::size_t k = columns.size();
  std::vector<std::vector<long>> a(3, std::vector<long>(k));
  for (std::size_t j = 0; j < k; ++j)
    for (int i = 0; i < 3; ++i) a[i][j] = columns[j][i];
  const std::size_t rows = 3, cols = k;
  std::vector<long> diag;
  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    // Pivot: smallest non-zero magnitude in the remaining block.
    for (;;) {
      long best = 0;
      std::size_t pi = rows, pj = cols;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (a[i][j] != 0 && (best == 0 || std::labs(a[i][j]) < best)) {
            best = std::labs(a[i][j]);
            pi = i;
            pj = j;
          }
      if (best == 0) return diag;
      std::swap(a[t], a[pi]);
      for (std::size_t i = 0; i < rows; ++i) std::swap(a[i][t], a[i][pj]);
      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        const long q = a[i][t] / a[t][t];
        for (std::size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        if (a[i][t] != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        const long q = a[t][j] / a[t][t];
        for (std::size_t i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
        if (a[t][j] != 0) clean = false;
      }
      if (!clean) continue;
      // Divisibility condition d_t | remaining entries.
      bool divides = true;
      for (std::size_t i = t + 1; i < rows && divides; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (a[i][j] % a[t][t] != 0) {
            for (std::size_t jj = t; jj < cols; ++jj) a[t][jj] += a[i][jj];
            divides = false;
            break;
          }
      if (divides) break;
    }
    diag.push_back(std::labs(a[t][t]));
  }
  return diag;
}

// Row-reduces the integer system M x = b (mod 1) with unimodular row
// operations. Returns the right-hand sides of the rows that became zero; the
// system is solvable over the reals modulo integers iff all of them are
// integers.
inline std::vector<double> congruence_residuals(std::vector<IVec3> m, std::vector<double> b) {
  const std::size_t rows = m.size();
  std::size_t r = 0;
  for (int c = 0; c < 3 && r < rows; ++c) {
    for (;;) {
      std::size_t p = rows;
      for (std::size_t i = r; i < rows; ++i)
        if (m[i][c] != 0 && (p == rows || std::abs(m[i][c]) < std::abs(m[p][c]))) p = i;
      if (p == rows) break;
      std::swap(m[r], m[p]);
      std::swap(b[r], b[p]);
      bool done = true;
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (m[i][c] == 0) continue;
        const int q = m[i][c] / m[r][c];
        for (int k = 0; k < 3; ++k) m[i][k] -= q * m[r][k];
        b[i] -= q * b[r];
        if (m[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (m[r][c] != 0) ++r;
  }
  return {b.begin() + static_cast<std::ptrdiff_t>(r), b.end()};
}

// Basis (as rows) of the full-rank lattice generated by integer vectors.
inline IMat3 lattice_basis(std::vector<IVec3> m) {
  const std::size_t rows = m.size();
  std::size_t r = 0;
  for (int c = 0; c < 3 && r < rows; ++c) {
    for (;;) {
      std::size_t p = rows;
      for (std::size_t i = r; i < rows; ++i)
        if (m[i][c] != 0 && (p == rows || std::abs(m[i][c]) < std::abs(m[p][c]))) p = i;
      if (p == rows) break;
      std::swap(m[r], m[p]);
      bool done = true;
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (m[i][c] == 0) continue;
        const int q = m[i][c] / m[r][c];
        for (int k = 0; k < 3; ++k) m[i][k] -= q * m[r][k];
        if (m[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (m[r][c] != 0) ++r;
  }
  IMat3 out{};
  for (std::size_t i = 0; i < 3 && i < r; ++i) out[i] = m[i];
  return out;
}

inline bool near_integer(double x, double tol) { return std::fabs(x - std::round(x)) < tol; }

}  // namespace crystalign::lattice_math
