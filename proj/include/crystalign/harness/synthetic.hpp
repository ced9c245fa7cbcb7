#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crystalign/ciflite/ciflite.hpp"
#include "crystalign/ciflite/prompt.hpp"
#include "crystalign/ciflite/samples.hpp"
#include "crystalign/symmetry/detect.hpp"
#include "crystalign/traces/trace.hpp"
#include "crystalign/validity/oxidation.hpp"

namespace crystalign {

struct Prototype {
  std::string formula;
  int spacegroup;
  CrystalStructure structure;
};

namespace synthetic_detail {

inline std::vector<Site> decorate(const std::vector<std::pair<std::string, std::vector<Vec3>>>& parts) {
  std::vector<Site> out;
  for (const auto& [el, pos] : parts)
    for (const auto& p : pos) out.emplace_back(el, p);
  return out;
}

inline const std::vector<Vec3>& fcc_points() {
  static const std::vector<Vec3> p{{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
  return p;
}

inline std::vector<Vec3> shifted(const std::vector<Vec3>& base, const Vec3& t) {
  std::vector<Vec3> out;
  for (const auto& b : base) out.push_back(b + t);
  return out;
}

inline CrystalStructure cubic(double a, const std::vector<std::pair<std::string, std::vector<Vec3>>>& parts) {
  return CrystalStructure(Lattice(a, a, a, 90, 90, 90), decorate(parts));
}

inline CrystalStructure rocksalt(const std::string& c, const std::string& an, double a) {
  return cubic(a, {{c, fcc_points()}, {an, shifted(fcc_points(), {0.5, 0, 0})}});
}

}  // namespace synthetic_detail

// Small library of textbook structures over elements the built-in tables cover.
inline const std::vector<Prototype>& synthetic_prototypes() {
  namespace sd = synthetic_detail;
  static const std::vector<Prototype> p = [] {
    std::vector<Prototype> v;
    v.push_back({"NaCl", 225, sd::rocksalt("Na", "Cl", 5.64)});
    v.push_back({"MgO", 225, sd::rocksalt("Mg", "O", 4.21)});
    v.push_back({"KCl", 225, sd::rocksalt("K", "Cl", 6.29)});
    v.push_back({"CaO", 225, sd::rocksalt("Ca", "O", 4.81)});
    v.push_back({"CaF2", 225,
                 sd::cubic(5.46, {{"Ca", sd::fcc_points()},
                                  {"F", sd::shifted(sd::fcc_points(), {0.25, 0.25, 0.25})},
                                  {"F", sd::shifted(sd::fcc_points(), {0.75, 0.75, 0.75})}})});
    v.push_back({"ZnS", 216,
                 sd::cubic(5.41, {{"Zn", sd::fcc_points()}, {"S", sd::shifted(sd::fcc_points(), {0.25, 0.25, 0.25})}})});
    v.push_back({"Cu", 225, sd::cubic(3.61, {{"Cu", sd::fcc_points()}})});
    v.push_back({"Ni", 225, sd::cubic(3.52, {{"Ni", sd::fcc_points()}})});
    v.push_back({"Fe", 229, sd::cubic(2.87, {{"Fe", {{0, 0, 0}, {0.5, 0.5, 0.5}}}})});
    v.push_back({"Si", 227,
                 sd::cubic(5.43, {{"Si", sd::fcc_points()}, {"Si", sd::shifted(sd::fcc_points(), {0.25, 0.25, 0.25})}})});
    v.push_back({"MgS", 221, sd::cubic(2.60, {{"Mg", {{0, 0, 0}}}, {"S", {{0.5, 0.5, 0.5}}}})});
    v.push_back({"Mg", 194,
                 CrystalStructure(Lattice(3.21, 3.21, 5.21, 90, 90, 120),
                                  sd::decorate({{"Mg", {{1.0 / 3, 2.0 / 3, 0.25}, {2.0 / 3, 1.0 / 3, 0.75}}}}))});
    return v;
  }();
  return p;
}

inline std::string synthetic_prompt(const Prototype& p, bool with_range) {
  std::string s = "Below is a description of a bulk material. The chemical formula is " + p.formula +
                  ". The space-group number is " + std::to_string(p.spacegroup) + ".";
  if (with_range) s += " The bulk modulus is between 20 and 200.";
  return s + " Generate a description of the lengths and angles of the lattice vectors and then the element type and "
             "coordinates for each atom within the lattice:";
}

// A deterministic batch of prompt/response records covering clean, strained,
// jittered, mislabelled and malformed outputs.
inline std::vector<SampleRecord> make_synthetic_samples(std::size_t n_prompts, std::size_t per_prompt,
                                                        std::uint64_t seed) {
  const auto& protos = synthetic_prototypes();
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<SampleRecord> out;
  out.reserve(n_prompts * per_prompt);
  for (std::size_t q = 0; q < n_prompts; ++q) {
    const Prototype& proto = protos[static_cast<std::size_t>(uniform() * protos.size())];
    const bool with_range = uniform() < 0.25;
    const std::string prompt = synthetic_prompt(proto, with_range);
    const std::string id = "p" + std::to_string(q);
    for (std::size_t k = 0; k < per_prompt; ++k) {
      const double mode = uniform();
      std::string response;
      CrystalStructure s = proto.structure.with_lattice(proto.structure.lattice().scaled(0.97 + 0.08 * uniform()));
      if (mode < 0.08) {
        response = "I cannot produce a structure for this material.";
      } else if (mode < 0.14) {
        std::string cif = write_ciflite(s);
        response = cif.substr(0, cif.size() / 2);  // truncated mid-block
      } else {
        if (mode < 0.24) {  // swap in a foreign element
          std::vector<Site> sites = s.sites();
          sites.front().element = sites.front().element == "Mg" ? "Al" : "Mg";
          s = CrystalStructure(s.lattice(), std::move(sites));
        } else if (mode < 0.30) {
          s = s.with_lattice(s.lattice().scaled(0.6));
        } else if (mode < 0.45) {
          std::vector<Site> sites;
          for (const auto& site : s.sites()) {
            const Vec3 d{uniform() - 0.5, uniform() - 0.5, uniform() - 0.5};
            sites.emplace_back(site.element, site.frac + 0.02 * d);
          }
          s = CrystalStructure(s.lattice(), std::move(sites));
        }
        const std::string cif = write_ciflite(s);
        if (uniform() < 0.3) {
          try {
            const auto sym = detect_spacegroup(s);
            const auto ox = find_oxidation_assignment(s.composition(), OxidationTable::builtin(), {});
            response = synthesize_trace(s, parse_prompt(prompt), sym, ox).text + "\n" + cif;
          } catch (const Error&) {
            response = cif;
          }
        } else {
          response = cif;
        }
      }
      out.push_back({id, prompt, response, 0});
    }
  }
  return out;
}

}  // namespace crystalign
