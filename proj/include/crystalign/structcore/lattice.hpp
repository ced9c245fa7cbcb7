#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "crystalign/core/error.hpp"
#include "crystalign/core/mat3.hpp"

namespace crystalign {

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Unit cell given by lengths (a, b, c) in Angstrom and angles (alpha, beta,
// gamma) in degrees. alpha is the angle between b and c, beta between a and
// c, gamma between a and b.
//
// The cell matrix holds the lattice vectors as rows in the lower-triangular
// convention: a along x, b in the xy plane.
class Lattice {
 public:
  Lattice(double a, double b, double c, double alpha, double beta, double gamma)
      : lengths_{a, b, c}, angles_{alpha, beta, gamma} {
    for (int i = 0; i < 3; ++i) {
      if (!(std::isfinite(lengths_[i]) && lengths_[i] > 0.0))
        throw GeometryError("lattice length " + std::to_string(lengths_[i]) + " is not positive");
      if (!(std::isfinite(angles_[i]) && angles_[i] > 0.0 && angles_[i] < 180.0))
        throw GeometryError("lattice angle " + std::to_string(angles_[i]) + " outside (0, 180)");
    }
    matrix_ = build_matrix();
    volume_ = det(matrix_);
    if (!(volume_ > 0.0) || !std::isfinite(volume_))
      throw GeometryError("lattice angles give a degenerate cell (non-positive volume)");
  }

  Lattice(const Vec3& lengths, const Vec3& angles)
      : Lattice(lengths[0], lengths[1], lengths[2], angles[0], angles[1], angles[2]) {}

  // Lengths and angles of three row vectors. The orientation of the vectors
  // is discarded; a left-handed triple yields the mirror-image cell.
  static Lattice from_vectors(const Mat3& rows) {
    const Vec3 l{norm(rows[0]), norm(rows[1]), norm(rows[2])};
    auto ang = [&](int i, int j) {
      double c = dot(rows[i], rows[j]) / (l[i] * l[j]);
      c = std::fmax(-1.0, std::fmin(1.0, c));
      return rad2deg(std::acos(c));
    };
    return Lattice(l, Vec3{ang(1, 2), ang(0, 2), ang(0, 1)});
  }

  const Vec3& lengths() const noexcept { return lengths_; }
  const Vec3& angles() const noexcept { return angles_; }
  const Mat3& matrix() const noexcept { return matrix_; }
  double volume() const noexcept { return volume_; }

  // Metric tensor G_ij = a_i . a_j.
  Mat3 metric() const {
    Mat3 g{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[i][j] = dot(matrix_[i], matrix_[j]);
    return g;
  }

  Vec3 to_cartesian(const Vec3& frac) const { return row_times(frac, matrix_); }
  Vec3 to_fractional(const Vec3& cart) const { return row_times(cart, inverse(matrix_)); }

  // Perpendicular distances between opposite cell faces.
  Vec3 face_heights() const {
    Vec3 h{};
    for (int i = 0; i < 3; ++i) {
      const Vec3 n = cross(matrix_[(i + 1) % 3], matrix_[(i + 2) % 3]);
      h[i] = volume_ / norm(n);
    }
    return h;
  }

  Lattice scaled(double factor) const {
    return Lattice(factor * lengths_[0], factor * lengths_[1], factor * lengths_[2], angles_[0],
                   angles_[1], angles_[2]);
  }

 private:
  Mat3 build_matrix() const {
    const double ca = std::cos(deg2rad(angles_[0]));
    const double cb = std::cos(deg2rad(angles_[1]));
    const double cg = std::cos(deg2rad(angles_[2]));
    const double sg = std::sin(deg2rad(angles_[2]));
    const double cx = cb;
    const double cy = (ca - cb * cg) / sg;
    const double cz2 = 1.0 - cx * cx - cy * cy;
    // Flat cells (e.g. angles summing to 360) leave cz2 at rounding level.
    if (!(cz2 > 1e-12)) throw GeometryError("lattice angles give a degenerate cell (non-positive volume)");
    Mat3 m{};
    m[0] = {lengths_[0], 0.0, 0.0};
    m[1] = {lengths_[1] * cg, lengths_[1] * sg, 0.0};
    m[2] = {lengths_[2] * cx, lengths_[2] * cy, lengths_[2] * std::sqrt(cz2)};
    return m;
  }

  Vec3 lengths_;
  Vec3 angles_;
  Mat3 matrix_{};
  double volume_ = 0.0;
};

inline Mat3 cell_matrix(const Lattice& lattice) { return lattice.matrix(); }

}  // namespace crystalign
