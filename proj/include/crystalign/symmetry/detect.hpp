#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "crystalign/structcore/niggli.hpp"
#include "crystalign/structcore/structure.hpp"
#include "crystalign/symmetry/table.hpp"

namespace crystalign {

inline constexpr double kDefaultSymmetryTolerance = 1e-3;  // Angstrom

enum class CrystalSystem { Triclinic, Monoclinic, Orthorhombic, Tetragonal, Trigonal, Hexagonal, Cubic };

inline const char* to_string(CrystalSystem c) {
  switch (c) {
    case CrystalSystem::Triclinic: return "triclinic";
    case CrystalSystem::Monoclinic: return "monoclinic";
    case CrystalSystem::Orthorhombic: return "orthorhombic";
    case CrystalSystem::Tetragonal: return "tetragonal";
    case CrystalSystem::Trigonal: return "trigonal";
    case CrystalSystem::Hexagonal: return "hexagonal";
    case CrystalSystem::Cubic: return "cubic";
  }
  return "unknown";
}

inline CrystalSystem crystal_system_for_number(int number) {
  if (number < 1 || number > 230) throw DomainError("space-group number " + std::to_string(number) + " outside [1, 230]");
  if (number <= 2) return CrystalSystem::Triclinic;
  if (number <= 15) return CrystalSystem::Monoclinic;
  if (number <= 74) return CrystalSystem::Orthorhombic;
  if (number <= 142) return CrystalSystem::Tetragonal;
  if (number <= 167) return CrystalSystem::Trigonal;
  if (number <= 194) return CrystalSystem::Hexagonal;
  return CrystalSystem::Cubic;
}

struct SpacegroupResult {
  int number = 1;
  std::string symbol = "P1";
  CrystalSystem crystal_system = CrystalSystem::Triclinic;
  std::vector<SymmetryOp> operations;  // in the input structure's basis
  std::vector<std::vector<std::size_t>> orbits;
  bool ambiguous = false;
  std::vector<int> candidates;  // every number consistent with the fingerprint
  double tolerance = kDefaultSymmetryTolerance;
};

inline CrystalSystem crystal_system(const SpacegroupResult& r) { return crystal_system_for_number(r.number); }

namespace symmetry_detail {

struct SiteSet {
  Mat3 basis;                    // rows
  std::vector<Vec3> frac;
  std::vector<int> species;      // index into a per-structure species list
  std::vector<std::vector<std::size_t>> by_species;
};

inline SiteSet make_site_set(const Mat3& basis, const std::vector<Vec3>& frac, const std::vector<std::string>& elements) {
  SiteSet s{basis, frac, {}, {}};
  std::map<std::string, int> ids;
  for (const auto& e : elements) {
    auto [it, fresh] = ids.emplace(e, static_cast<int>(ids.size()));
    if (fresh) s.by_species.emplace_back();
    s.species.push_back(it->second);
    s.by_species[it->second].push_back(s.species.size() - 1);
  }
  return s;
}

inline double frac_gap(const Mat3& basis, const Vec3& a, const Vec3& b) {
  return norm(row_times(wrap_centered(a - b), basis));
}

// Image of every site under (w, t), or empty if some image has no partner.
inline std::vector<std::size_t> site_permutation(const SiteSet& s, const IMat3& w, const Vec3& t, double tol) {
  std::vector<std::size_t> perm(s.frac.size());
  for (std::size_t i = 0; i < s.frac.size(); ++i) {
    const Vec3 p = w * s.frac[i] + t;
    bool found = false;
    for (std::size_t j : s.by_species[s.species[i]])
      if (frac_gap(s.basis, p, s.frac[j]) < tol) {
        perm[i] = j;
        found = true;
        break;
      }
    if (!found) return {};
  }
  return perm;
}

inline Vec3 refine_translation(const SiteSet& s, const IMat3& w, const Vec3& t, const std::vector<std::size_t>& perm) {
  Vec3 acc{0, 0, 0};
  for (std::size_t i = 0; i < perm.size(); ++i) acc += wrap_centered(s.frac[perm[i]] - (w * s.frac[i] + t));
  return wrap01(t + (1.0 / static_cast<double>(perm.size())) * acc);
}

// Integer matrices with entries in {-1, 0, 1} preserving the metric.
inline std::vector<IMat3> lattice_rotations(const Mat3& basis, double tol) {
  Mat3 g{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[i][j] = dot(basis[i], basis[j]);
  const Vec3 len{std::sqrt(g[0][0]), std::sqrt(g[1][1]), std::sqrt(g[2][2])};
  std::vector<IMat3> out;
  IMat3 w{};
  for (int code = 0; code < 19683; ++code) {
    int c = code;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        w[i][j] = c % 3 - 1;
        c /= 3;
      }
    const int d = det(w);
    if (d != 1 && d != -1) continue;
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i)
      for (int j = i; j < 3 && ok; ++j) {
        double gij = 0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) gij += w[k][i] * g[k][l] * w[l][j];
        if (std::fabs(gij - g[i][j]) > tol * (len[i] + len[j])) ok = false;
      }
    if (ok) out.push_back(w);
  }
  return out;
}

inline IMat3 conjugate_by(const IMat3& t, const IMat3& w) {
  // t^T w t^-T for unimodular t
  return transpose(t) * w * transpose(inverse_unimodular(t));
}

}  // namespace symmetry_detail

// Partition of site indices into orbits under `ops` (fractional operations in
// the structure's own basis). Orbits are ordered by their smallest index.
inline std::vector<std::vector<std::size_t>> site_orbits(const CrystalStructure& s, const std::vector<SymmetryOp>& ops,
                                                         double tol = kDefaultSymmetryTolerance) {
  const std::size_t n = s.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const Mat3& m = s.lattice().matrix();
  const int shell = min_image_shell(s.lattice());
  for (const auto& op : ops) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 p = apply(op, s.sites()[i].frac);
      for (std::size_t j = 0; j < n; ++j) {
        if (s.sites()[j].element != s.sites()[i].element) continue;
        if (detail::min_image_norm(m, p - s.sites()[j].frac, shell, false) < tol) {
          const std::size_t a = find(i), b = find(j);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
          break;
        }
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

namespace symmetry_detail {

// Detection in the cell as given. Rotations are searched among the
// symmetries of this cell's lattice, so a supercell may see only a subgroup.
inline SpacegroupResult detect_in_cell(const CrystalStructure& s, double tol, const SpacegroupTable& table) {
  namespace sd = symmetry_detail;
  SpacegroupResult result;
  result.tolerance = tol;

  const NiggliResult nr = niggli_reduce_basis(s.lattice().matrix());
  const Mat3 tinv = to_real(inverse_unimodular(nr.transform));
  std::vector<Vec3> frac;
  std::vector<std::string> elements;
  for (const auto& site : s.sites()) {
    frac.push_back(wrap01(row_times(site.frac, tinv)));
    elements.push_back(site.element);
  }
  const sd::SiteSet set = sd::make_site_set(nr.basis, frac, elements);

  std::size_t ref_species = 0;
  for (std::size_t k = 1; k < set.by_species.size(); ++k)
    if (set.by_species[k].size() < set.by_species[ref_species].size()) ref_species = k;
  const auto& ref = set.by_species[ref_species];
  const std::size_t x0 = ref.front();

  std::vector<SymmetryOp> reps;
  std::vector<Vec3> centering;
  for (const IMat3& w : sd::lattice_rotations(nr.basis, tol)) {
    const bool identity = w == iidentity3();
    for (std::size_t y : ref) {
      const Vec3 t0 = wrap01(set.frac[y] - w * set.frac[x0]);
      const auto perm = sd::site_permutation(set, w, t0, tol);
      if (perm.empty()) continue;
      const Vec3 t = sd::refine_translation(set, w, t0, perm);
      if (identity) {
        if (y == x0) reps.push_back({w, {0, 0, 0}});
        else centering.push_back(t);
        continue;
      }
      reps.push_back({w, t});
      break;
    }
  }

  // Identify in a primitive basis of the structure's translation lattice.
  std::vector<SymmetryOp> prim;
  PrimitiveBasis basis;
  constexpr double kIntTol = 0.05;
  if (!to_primitive_reps(reps, centering, prim, basis, kIntTol)) {
    // Translations inconsistent at this tolerance: keep only the identity.
    result.ambiguous = true;
    reps = {SymmetryOp{}};
    centering.clear();
    to_primitive_reps(reps, centering, prim, basis, kIntTol);
  }
  // Close the representatives modulo the primitive lattice.
  for (std::size_t i = 0; i < prim.size() && prim.size() <= 48; ++i)
    for (std::size_t j = 0; j <= i && prim.size() <= 48; ++j)
      for (const auto& c : {compose(prim[i], prim[j]), compose(prim[j], prim[i])}) {
        auto it = std::find_if(prim.begin(), prim.end(), [&](const SymmetryOp& o) { return o.rotation == c.rotation; });
        if (it == prim.end()) {
          prim.push_back(c);
          result.ambiguous = true;
        } else if (translation_distance(it->translation, c.translation) > kIntTol) {
          result.ambiguous = true;
        }
      }
  if (prim.size() > 48) {
    result.ambiguous = true;
    prim = {SymmetryOp{}};
    centering.clear();
    basis = {};
  }

  const GroupSignature sig = group_signature(prim, kIntTol);
  if (sig.marginal) result.ambiguous = true;
  std::vector<int> found = table.lookup(sig.key);
  if (found.empty()) {
    result.ambiguous = true;
    found = table.lookup_coarse(sig.coarse);
    if (found.empty()) found = table.lookup_point_group(sig.point_group);
    if (found.empty()) found = {1};
  }
  if (found.size() > 1) result.ambiguous = true;
  result.candidates = found;
  result.number = *std::max_element(found.begin(), found.end(), [&](int a, int b) {
    return std::pair(table.point_group_order(a), a) < std::pair(table.point_group_order(b), b);
  });
  result.symbol = table.entry(result.number).symbol;
  result.crystal_system = crystal_system_for_number(result.number);

  // Full operation list in the input basis: representatives times centering.
  std::vector<Vec3> shifts{{0, 0, 0}};
  for (const auto& c : centering) shifts.push_back(c);
  for (const auto& p : prim) {
    const SymmetryOp red = basis.from_primitive(p);
    for (const auto& c : shifts) {
      SymmetryOp op;
      op.rotation = sd::conjugate_by(nr.transform, red.rotation);
      op.translation = wrap01(transpose(nr.transform) * (red.translation + c));
      result.operations.push_back(op);
    }
  }
  result.orbits = site_orbits(s, result.operations, tol);
  return result;
}

// Pure translations mapping the structure onto itself, in its own basis.
inline std::vector<Vec3> pure_translations(const CrystalStructure& s, double tol) {
  std::vector<Vec3> frac;
  std::vector<std::string> elements;
  for (const auto& site : s.sites()) {
    frac.push_back(wrap01(site.frac));
    elements.push_back(site.element);
  }
  const SiteSet set = make_site_set(s.lattice().matrix(), frac, elements);
  std::size_t ref_species = 0;
  for (std::size_t k = 1; k < set.by_species.size(); ++k)
    if (set.by_species[k].size() < set.by_species[ref_species].size()) ref_species = k;
  const auto& ref = set.by_species[ref_species];
  std::vector<Vec3> out;
  for (std::size_t y : ref) {
    if (y == ref.front()) continue;
    const Vec3 t0 = wrap01(set.frac[y] - set.frac[ref.front()]);
    const auto perm = site_permutation(set, iidentity3(), t0, tol);
    if (!perm.empty()) out.push_back(wrap01(refine_translation(set, iidentity3(), t0, perm)));
  }
  return out;
}

}  // namespace symmetry_detail

// Non-primitive input cells are reduced to their primitive cell first, so the
// group found does not depend on the supercell chosen. Operations are reported
// in the input basis; those whose rotation is not integral there are dropped.
inline SpacegroupResult detect_spacegroup(const CrystalStructure& s, double tol = kDefaultSymmetryTolerance,
                                          const SpacegroupTable& table = SpacegroupTable::builtin()) {
  namespace sd = symmetry_detail;
  if (!(tol > 0.0)) throw DomainError("symmetry tolerance must be positive");
  const std::vector<Vec3> centering = sd::pure_translations(s, tol);
  if (centering.empty()) return sd::detect_in_cell(s, tol, table);

  std::vector<SymmetryOp> unused;
  PrimitiveBasis basis;
  if (!to_primitive_reps({SymmetryOp{}}, centering, unused, basis, 0.05) ||
      s.size() % static_cast<std::size_t>(basis.n) != 0)
    return sd::detect_in_cell(s, tol, table);

  // Primitive vectors are the columns of q / n in the input basis.
  Mat3 qt = to_real(transpose(basis.q));
  for (auto& row : qt)
    for (auto& v : row) v /= basis.n;
  const Mat3 prim_matrix = qt * s.lattice().matrix();
  const Mat3 to_prim = inverse(qt);
  std::vector<Site> sites;
  for (const auto& site : s.sites()) {
    const Vec3 x = wrap01(row_times(site.frac, to_prim));
    bool seen = false;
    for (const auto& kept : sites)
      seen = seen || (kept.element == site.element && sd::frac_gap(prim_matrix, kept.frac, x) < tol);
    if (!seen) sites.emplace_back(site.element, x);
  }
  if (sites.size() * static_cast<std::size_t>(basis.n) != s.size()) return sd::detect_in_cell(s, tol, table);

  SpacegroupResult result =
      sd::detect_in_cell(CrystalStructure(Lattice::from_vectors(prim_matrix), std::move(sites)), tol, table);
  const int dq = det(basis.q);
  const IMat3 adj = adjugate(basis.q);
  std::vector<Vec3> shifts{{0, 0, 0}};
  shifts.insert(shifts.end(), centering.begin(), centering.end());
  std::vector<SymmetryOp> ops;
  for (const auto& p : result.operations) {
    const IMat3 num = basis.q * p.rotation * adj;
    IMat3 w{};
    bool integral = true;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) {
        integral = integral && num[x][y] % dq == 0;
        w[x][y] = num[x][y] / dq;
      }
    if (!integral) continue;
    const Vec3 t = (1.0 / basis.n) * (basis.q * p.translation);
    for (const auto& c : shifts) {
      const SymmetryOp op{w, wrap01(t + c)};
      const bool dup = std::any_of(ops.begin(), ops.end(), [&](const SymmetryOp& o) {
        return o.rotation == op.rotation && translation_distance(o.translation, op.translation) < 1e-6;
      });
      if (!dup) ops.push_back(op);
    }
  }
  result.operations = std::move(ops);
  result.orbits = site_orbits(s, result.operations, tol);
  return result;
}

// Interface shared by the built-in detector and any external toolkit used to
// cross-check it.
class SymmetryOracle {
 public:
  virtual ~SymmetryOracle() = default;
  virtual SpacegroupResult detect(const CrystalStructure& s, double tol) const = 0;
};

class BuiltinSymmetryDetector final : public SymmetryOracle {
 public:
  SpacegroupResult detect(const CrystalStructure& s, double tol) const override { return detect_spacegroup(s, tol); }
};

}  // namespace crystalign
