#pragma once

// Setting-independent fingerprint of a space group.
//
// The input is a set of coset representatives (one translation per rotation)
// in a primitive basis. Each operation is described by invariants of its
// conjugacy class under the affine normalizer (rotation type, axis index in
// the lattice, intrinsic screw/glide part, orbit lattice of its axis); the
// group adds pairwise common-fixed-point flags, a symmorphic flag, and the
// Smith invariants of each axis family. Two settings of the same type give
// the same string and the 230 types give 230 distinct strings.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crystalign/symmetry/intlattice.hpp"
#include "crystalign/symmetry/operations.hpp"

namespace crystalign {

struct GroupSignature {
  std::string key;         // full fingerprint
  std::string point_group; // rotation-type multiset only
  std::string coarse;      // per-operation descriptors without pair data
  bool marginal = false;   // some integer test was decided close to its tolerance
};

namespace symmetry_detail {

namespace lm = lattice_math;

inline Vec3 column_real(const IMat3& m, int j) { return {double(m[0][j]), double(m[1][j]), double(m[2][j])}; }
inline IVec3 column(const IMat3& m, int j) { return {m[0][j], m[1][j], m[2][j]}; }

inline double fdot(const IVec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline int idot(const IVec3& a, const IVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

class SignatureBuilder {
 public:
  SignatureBuilder(std::vector<SymmetryOp> reps, double itol) : ops_(std::move(reps)), itol_(itol) {}

  GroupSignature build() {
    const IMat3 I = iidentity3();
    const IMat3 mI = lm::negate(I);
    for (const auto& op : ops_) {
      if (op.rotation == I || op.rotation == mI) {
        axes_.push_back(std::nullopt);
        continue;
      }
      const IMat3 rp = det(op.rotation) == 1 ? op.rotation : lm::negate(op.rotation);
      axes_.push_back(lm::rotation_axis(rp));
    }
    std::vector<std::string> base(ops_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) base[i] = base_descriptor(i);

    std::vector<std::string> desc(ops_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      std::string d = base[i] + "/";
      if (axes_[i]) {
        std::vector<IVec3> images;
        for (const auto& op : ops_) images.push_back(op.rotation * *axes_[i]);
        d += join(lm::smith_invariants(images));
      }
      d += "/";
      if (is_glide_[i]) {
        std::set<std::string> par;
        const IMat3& r = ops_[i].rotation;
        IMat3 b = r;
        for (int k = 0; k < 3; ++k) b[k][k] += 1;
        const Vec3 w = 0.5 * (b * ops_[i].translation);
        for (std::size_t j = 0; j < ops_.size(); ++j) {
          if (!axes_[j] || r * *axes_[j] != *axes_[j]) continue;
          if (glide_along(w, b, *axes_[j])) par.insert(base[j]);
        }
        for (const auto& p : par) d += p + ",";
      }
      desc[i] = d;
    }

    GroupSignature sig;
    {
      std::vector<std::string> sorted = desc;
      std::sort(sorted.begin(), sorted.end());
      for (const auto& d : sorted) sig.coarse += d + ";";
      std::vector<std::string> types;
      for (const auto& op : ops_) types.push_back(type_of(op.rotation));
      std::sort(types.begin(), types.end());
      for (const auto& t : types) sig.point_group += t + ";";
    }

    std::vector<std::size_t> fixed;
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i].rotation != I && solvable({i})) fixed.push_back(i);
    std::vector<std::string> pairs;
    for (std::size_t a = 0; a < fixed.size(); ++a)
      for (std::size_t b = a + 1; b < fixed.size(); ++b) {
        const auto& da = desc[fixed[a]];
        const auto& db = desc[fixed[b]];
        pairs.push_back((da < db ? da + "&" + db : db + "&" + da) + (solvable({fixed[a], fixed[b]}) ? "+" : "-"));
      }
    std::sort(pairs.begin(), pairs.end());

    std::vector<std::size_t> all(ops_.size());
    std::iota(all.begin(), all.end(), 0);
    const bool symmorphic = solvable(all);

    std::map<std::pair<int, int>, std::vector<IVec3>> families;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (!axes_[i]) continue;
      const IMat3& r = ops_[i].rotation;
      const int d = det(r);
      families[{d, lm::rotation_order(d == 1 ? r : lm::negate(r))}].push_back(*axes_[i]);
    }

    sig.key = sig.coarse + "#";
    for (const auto& p : pairs) sig.key += p + ";";
    sig.key += symmorphic ? "#S#" : "#N#";
    for (const auto& [ty, vs] : families) {
      const auto inv = lm::smith_invariants(vs);
      sig.key += std::to_string(ty.first) + "." + std::to_string(ty.second) + ":" + std::to_string(inv.size()) + ":" +
                 join(inv) + ";";
    }
    sig.marginal = marginal_;
    return sig;
  }

 private:
  std::vector<SymmetryOp> ops_;
  double itol_;
  std::vector<std::optional<IVec3>> axes_;
  std::vector<bool> is_glide_;
  bool marginal_ = false;

  static std::string join(const std::vector<long>& v) {
    std::string s;
    for (long x : v) s += std::to_string(x) + ",";
    return s;
  }

  static std::string type_of(const IMat3& r) {
    const int d = det(r);
    const IMat3 rp = d == 1 ? r : lm::negate(r);
    return (d == 1 ? "+" : "-") + std::to_string(lm::rotation_order(rp));
  }

  // Integer test with a record of how confidently it was decided.
  bool near_int(double x) {
    const double e = std::fabs(x - std::round(x));
    if (e > 0.5 * itol_ && e < 2.0 * itol_) marginal_ = true;
    return e < itol_;
  }

  std::string base_descriptor(std::size_t i) {
    is_glide_.push_back(false);
    const IMat3& r = ops_[i].rotation;
    const Vec3& t = ops_[i].translation;
    const IMat3 I = iidentity3();
    if (r == I) return "1";
    if (r == lm::negate(I)) return "-1";
    const int d = det(r);
    const IMat3 rp = d == 1 ? r : lm::negate(r);
    const int n = lm::rotation_order(rp);
    const IVec3 u = *axes_[i];
    IMat3 a{};
    {
      IMat3 p = I;
      for (int k = 0; k < n; ++k) {
        for (int x = 0; x < 3; ++x)
          for (int y = 0; y < 3; ++y) a[x][y] += p[x][y];
        p = p * rp;
      }
    }
    const int uu = idot(u, u);
    int g = 0;
    for (int j = 0; j < 3; ++j) g = std::gcd(g, std::abs(idot(column(a, j), u) / uu));
    if (d == 1) {
      const double c = fdot(u, a * t) / uu / n;
      const double p = static_cast<double>(g) / n;
      double s = c / p;
      s -= std::floor(s);
      if (n >= 3) {
        IVec3 v{1, 0, 0};
        for (int k = 0; k < 3; ++k) {
          v = IVec3{0, 0, 0};
          v[k] = 1;
          if (!lm::is_zero(lm::icross(u, v))) break;
        }
        const IVec3 rv = rp * v;
        if (det(IMat3{u, v, rv}) < 0) s = 1.0 - s;
      }
      const double sn = s * n;
      near_int(sn);  // records marginal decisions
      const int k = static_cast<int>(std::lround(sn)) % n;
      return "r" + std::to_string(n) + "." + std::to_string(g) + "." + std::to_string(k);
    }
    if (n == 2) {
      IMat3 b = r;
      for (int k = 0; k < 3; ++k) b[k][k] += 1;
      const Vec3 bt = b * t;
      const bool glide = !in_image(bt, b, 1.0);
      is_glide_[i] = glide;
      return "m." + std::to_string(g) + (glide ? ".g" : ".0");
    }
    return "i" + std::to_string(n) + "." + std::to_string(g);
  }

  // Is v in (b / scale) Z^3? Brute force over small coefficients.
  bool in_image(const Vec3& v, const IMat3& b, double scale) {
    for (int x = -3; x <= 3; ++x)
      for (int y = -3; y <= 3; ++y)
        for (int z = -3; z <= 3; ++z) {
          const Vec3 l{double(x), double(y), double(z)};
          const Vec3 d = v - (1.0 / scale) * (b * l);
          if (std::fabs(d[0]) < itol_ && std::fabs(d[1]) < itol_ && std::fabs(d[2]) < itol_) return true;
        }
    return false;
  }

  // Does the glide vector w, modulo (b/2) Z^3, lie along the line spanned by u?
  bool glide_along(const Vec3& w, const IMat3& b, const IVec3& u) {
    const Vec3 uf{double(u[0]), double(u[1]), double(u[2])};
    for (int x = -3; x <= 3; ++x)
      for (int y = -3; y <= 3; ++y)
        for (int z = -3; z <= 3; ++z) {
          const Vec3 l{double(x), double(y), double(z)};
          const Vec3 d = w - 0.5 * (b * l);
          const Vec3 c = cross(d, uf);
          if (std::fabs(c[0]) < itol_ && std::fabs(c[1]) < itol_ && std::fabs(c[2]) < itol_) return true;
        }
    return false;
  }

  // Do the selected operations share a fixed point (mod lattice)?
  bool solvable(const std::vector<std::size_t>& which) {
    std::vector<IVec3> m;
    std::vector<double> b;
    for (std::size_t i : which) {
      const IMat3& r = ops_[i].rotation;
      for (int k = 0; k < 3; ++k) {
        IVec3 row{-r[k][0], -r[k][1], -r[k][2]};
        row[k] += 1;
        m.push_back(row);
        b.push_back(ops_[i].translation[k]);
      }
    }
    for (double x : lm::congruence_residuals(std::move(m), std::move(b)))
      if (!near_int(x)) return false;
    return true;
  }
};

}  // namespace symmetry_detail

inline GroupSignature group_signature(std::vector<SymmetryOp> primitive_reps, double itol) {
  return symmetry_detail::SignatureBuilder(std::move(primitive_reps), itol).build();
}

// Columns of q / n span the primitive lattice, in the original basis.
struct PrimitiveBasis {
  IMat3 q = iidentity3();
  int n = 1;

  SymmetryOp to_primitive(const SymmetryOp& op, bool* exact = nullptr) const {
    const int dq = det(q);
    const IMat3 adj = adjugate(q);
    const IMat3 num = adj * op.rotation * q;
    IMat3 r{};
    bool ok = true;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) {
        if (num[x][y] % dq != 0) ok = false;
        r[x][y] = num[x][y] / dq;
      }
    if (exact) *exact = ok;
    return {r, wrap01((static_cast<double>(n) / dq) * (adj * op.translation))};
  }
  SymmetryOp from_primitive(const SymmetryOp& op) const {
    const int dq = det(q);
    const IMat3 num = q * op.rotation * adjugate(q);
    IMat3 r{};
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) r[x][y] = num[x][y] / dq;
    return {r, wrap01((1.0 / n) * (q * op.translation))};
  }
};

// Transforms a group given by coset representatives plus centering vectors
// (in some basis) into representatives in a primitive basis. Returns false if
// the centering vectors do not form a lattice consistent with the rotations.
inline bool to_primitive_reps(const std::vector<SymmetryOp>& reps, const std::vector<Vec3>& centering,
                              std::vector<SymmetryOp>& out, PrimitiveBasis& basis, double itol) {
  namespace lm = lattice_math;
  const int n = static_cast<int>(centering.size()) + 1;
  std::vector<IVec3> gens{{n, 0, 0}, {0, n, 0}, {0, 0, n}};
  for (const auto& c : centering) {
    IVec3 v{};
    for (int k = 0; k < 3; ++k) {
      const double x = c[k] * n;
      if (std::fabs(x - std::round(x)) > itol * n) return false;
      v[k] = static_cast<int>(std::lround(x));
    }
    gens.push_back(v);
  }
  const IMat3 basis_rows = lm::lattice_basis(gens);
  IMat3 q = transpose(basis_rows);
  if (det(q) < 0)
    for (int k = 0; k < 3; ++k) q[k][2] = -q[k][2];
  if (det(q) != n * n) return false;
  basis = {q, n};
  out.clear();
  for (const auto& op : reps) {
    bool exact = false;
    out.push_back(basis.to_primitive(op, &exact));
    if (!exact) return false;
  }
  return true;
}

}  // namespace crystalign
