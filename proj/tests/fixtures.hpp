#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crystalign/ciflite/ciflite.hpp"
#include "crystalign/structcore/structure.hpp"

namespace fixtures {

using namespace crystalign;

// The worked calcite example, exactly as printed.
inline const std::string kCalciteCif =
    "<CIF>P1\n"
    "6.35844783 6.35844725 6.35844589\n"
    "46.3714 46.3714 46.3714\n"
    "Ca 1 0.50000000 0.50000000 0.50000000\n"
    "Ca 1 -0.00000000 0.00000000 -0.00000000\n"
    "C 1 0.75000000 0.75000000 0.75000000\n"
    "C 1 0.25000000 0.25000000 0.25000000\n"
    "O 1 0.75000000 0.49216771 0.00783229\n"
    "O 1 0.00783229 0.75000000 0.49216771\n"
    "O 1 0.50783229 0.99216771 0.25000000\n"
    "O 1 0.25000000 0.50783229 0.99216771\n"
    "O 1 0.99216771 0.25000000 0.50783229\n"
    "O 1 0.49216771 0.00783229 0.75000000</CIF>";

inline CrystalStructure calcite() { return parse_ciflite(kCalciteCif); }

inline CrystalStructure cubic(double a, std::vector<Site> sites) {
  return CrystalStructure(Lattice(a, a, a, 90, 90, 90), std::move(sites));
}

inline CrystalStructure fcc(const std::string& el, double a) {
  return cubic(a, {{el, {0, 0, 0}}, {el, {0, 0.5, 0.5}}, {el, {0.5, 0, 0.5}}, {el, {0.5, 0.5, 0}}});
}

inline CrystalStructure bcc(const std::string& el, double a) { return cubic(a, {{el, {0, 0, 0}}, {el, {0.5, 0.5, 0.5}}}); }

inline CrystalStructure rocksalt(const std::string& c = "Na", const std::string& an = "Cl", double a = 5.64) {
  std::vector<Site> s;
  for (Vec3 p : {Vec3{0, 0, 0}, Vec3{0, 0.5, 0.5}, Vec3{0.5, 0, 0.5}, Vec3{0.5, 0.5, 0}}) {
    s.emplace_back(c, p);
    s.emplace_back(an, p + Vec3{0.5, 0, 0});
  }
  return cubic(a, std::move(s));
}

inline CrystalStructure cscl(double a = 4.12) { return cubic(a, {{"Cs", {0, 0, 0}}, {"Cl", {0.5, 0.5, 0.5}}}); }

inline CrystalStructure diamond(const std::string& el = "C", double a = 3.567) {
  std::vector<Site> s;
  for (Vec3 p : {Vec3{0, 0, 0}, Vec3{0, 0.5, 0.5}, Vec3{0.5, 0, 0.5}, Vec3{0.5, 0.5, 0}}) {
    s.emplace_back(el, p);
    s.emplace_back(el, p + Vec3{0.25, 0.25, 0.25});
  }
  return cubic(a, std::move(s));
}

inline CrystalStructure hcp(const std::string& el = "Mg", double a = 3.21, double c = 5.21) {
  return CrystalStructure(Lattice(a, a, c, 90, 90, 120),
                          {{el, {1.0 / 3, 2.0 / 3, 0.25}}, {el, {2.0 / 3, 1.0 / 3, 0.75}}});
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Random triclinic cell with 1..max_sites atoms drawn from `elements`.
inline CrystalStructure random_structure(std::mt19937_64& rng, const std::vector<std::string>& elements,
                                         std::size_t max_sites = 6) {
  for (;;) {
    try {
      Lattice l(uniform(rng, 3, 8), uniform(rng, 3, 8), uniform(rng, 3, 8), uniform(rng, 65, 115),
                uniform(rng, 65, 115), uniform(rng, 65, 115));
      std::vector<Site> sites;
      const std::size_t n = 1 + pick(rng, max_sites);
      for (std::size_t i = 0; i < n; ++i)
        sites.emplace_back(elements[pick(rng, elements.size())],
                           Vec3{uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)});
      return CrystalStructure(std::move(l), std::move(sites));
    } catch (const GeometryError&) {
    }
  }
}

}  // namespace fixtures

namespace fixtures {

// Textbook cells, randomly strained, plus random triclinic cells.
inline std::vector<CrystalStructure> mixed_corpus(std::mt19937_64& rng, std::size_t n) {
  const std::vector<CrystalStructure> protos{rocksalt(), rocksalt("Mg", "O", 4.21), cscl(), diamond("Si", 5.43),
                                             hcp(), fcc("Cu", 3.61), bcc("Fe", 2.87), calcite()};
  std::vector<CrystalStructure> out;
  while (out.size() < n) {
    if (out.size() % 2 == 0) {
      const auto& p = protos[pick(rng, protos.size())];
      out.push_back(p.with_lattice(p.lattice().scaled(uniform(rng, 0.95, 1.08))));
    } else {
      auto s = random_structure(rng, {"Na", "Cl", "Mg", "O", "Ca", "C"}, 6);
      out.push_back(s.with_lattice(s.lattice().scaled(1.3)));
    }
  }
  return out;
}

}  // namespace fixtures
