#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "crystalign/core/error.hpp"
#include "crystalign/core/mat3.hpp"
#include "crystalign/structcore/composition.hpp"
#include "crystalign/structcore/elements.hpp"
#include "crystalign/structcore/lattice.hpp"

namespace crystalign {

// One explicit atom. Fractional coordinates are stored wrapped into [0, 1).
struct Site {
  std::string element;
  Vec3 frac{};

  Site() = default;
  Site(std::string el, const Vec3& f) : element(std::move(el)), frac(wrap01(f)) {}

  friend bool operator==(const Site&, const Site&) = default;
};

class CrystalStructure {
 public:
  CrystalStructure(Lattice lattice, std::vector<Site> sites)
      : lattice_(std::move(lattice)), sites_(std::move(sites)) {
    if (sites_.empty()) throw DomainError("structure has no sites");
    for (auto& s : sites_) {
      if (!is_element_symbol(s.element)) throw DomainError("unknown element " + s.element);
      for (double x : s.frac)
        if (!std::isfinite(x)) throw DomainError("non-finite fractional coordinate");
      s.frac = wrap01(s.frac);
    }
  }

  const Lattice& lattice() const noexcept { return lattice_; }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  std::size_t size() const noexcept { return sites_.size(); }
  double volume() const noexcept { return lattice_.volume(); }

  Vec3 cartesian(std::size_t i) const { return lattice_.to_cartesian(sites_.at(i).frac); }

  Composition composition() const {
    std::map<std::string, int> m;
    for (const auto& s : sites_) ++m[s.element];
    return Composition(std::move(m));
  }

  // Element symbols in order of first appearance in the site list.
  std::vector<std::string> species_order() const {
    std::vector<std::string> out;
    for (const auto& s : sites_)
      if (std::find(out.begin(), out.end(), s.element) == out.end()) out.push_back(s.element);
    return out;
  }

  CrystalStructure with_lattice(Lattice l) const { return CrystalStructure(std::move(l), sites_); }

  // Translate every site by `shift` (fractional), wrapping back into the cell.
  CrystalStructure translated(const Vec3& shift) const {
    auto s = sites_;
    for (auto& site : s) site.frac = wrap01(site.frac + shift);
    return CrystalStructure(lattice_, std::move(s));
  }

  // n1 x n2 x n3 supercell, sites ordered by image then original index.
  CrystalStructure supercell(int n1, int n2, int n3) const {
    if (n1 < 1 || n2 < 1 || n3 < 1) throw DomainError("supercell multipliers must be positive");
    const auto& l = lattice_.lengths();
    Lattice big(l[0] * n1, l[1] * n2, l[2] * n3, lattice_.angles()[0], lattice_.angles()[1],
                lattice_.angles()[2]);
    std::vector<Site> s;
    s.reserve(sites_.size() * n1 * n2 * n3);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j)
        for (int k = 0; k < n3; ++k)
          for (const auto& site : sites_)
            s.emplace_back(site.element, Vec3{(site.frac[0] + i) / n1, (site.frac[1] + j) / n2,
                                              (site.frac[2] + k) / n3});
    return CrystalStructure(std::move(big), std::move(s));
  }

 private:
  Lattice lattice_;
  std::vector<Site> sites_;
};

// Translation shell searched by the minimum-image routines: +-1 cells, or
// +-2 when any angle leaves [45, 135] degrees.
inline int min_image_shell(const Lattice& l) {
  for (double a : l.angles())
    if (a < 45.0 || a > 135.0) return 2;
  return 1;
}

namespace detail {
inline double min_image_norm(const Mat3& m, const Vec3& dfrac, int shell, bool skip_zero) {
  const Vec3 d = wrap_centered(dfrac);
  double best = std::numeric_limits<double>::infinity();
  for (int i = -shell; i <= shell; ++i)
    for (int j = -shell; j <= shell; ++j)
      for (int k = -shell; k <= shell; ++k) {
        const Vec3 f{d[0] + i, d[1] + j, d[2] + k};
        if (skip_zero && f[0] == 0.0 && f[1] == 0.0 && f[2] == 0.0) continue;
        best = std::min(best, norm(row_times(f, m)));
      }
  return best;
}
}  // namespace detail

// Minimum Cartesian distance between site i and any periodic image of site j.
// For i == j the zero translation is excluded (nearest self-image).
inline double min_image_distance(const CrystalStructure& s, std::size_t i, std::size_t j) {
  const auto& sites = s.sites();
  if (i >= sites.size() || j >= sites.size()) throw DomainError("site index out of range");
  const int shell = min_image_shell(s.lattice());
  if (i == j) return detail::min_image_norm(s.lattice().matrix(), Vec3{0, 0, 0}, shell, true);
  // Evaluate with the lower index first so that (i, j) and (j, i) agree bit for bit.
  const std::size_t lo = std::min(i, j), hi = std::max(i, j);
  return detail::min_image_norm(s.lattice().matrix(), sites[hi].frac - sites[lo].frac, shell, false);
}

// Minimum over all site pairs, including each site's own periodic images.
inline double all_pair_min_distance(const CrystalStructure& s) {
  double best = min_image_distance(s, 0, 0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) best = std::min(best, min_image_distance(s, i, j));
  return best;
}

}  // namespace crystalign
