#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "crystalign/ciflite/prompt.hpp"
#include "crystalign/core/decimal.hpp"
#include "crystalign/structcore/structure.hpp"
#include "crystalign/symmetry/detect.hpp"
#include "crystalign/validity/oxidation.hpp"

namespace crystalign {

inline constexpr int kTraceBondDecimals = 2;
inline constexpr int kTraceVolumeDecimals = 2;
inline constexpr int kTraceGapDecimals = 3;
inline constexpr int kTraceEnergyDecimals = 3;
inline constexpr double kCoordinationShellFactor = 1.2;
inline constexpr double kMetalGapBelow = 0.05;          // eV
inline constexpr double kSemiconductorGapBelow = 3.0;   // eV
inline constexpr double kOnHullAtMost = 1e-6;           // eV/atom

struct ElementOrbits {
  std::string element;
  std::vector<int> sizes;  // descending
  std::optional<int> oxidation;
  friend bool operator==(const ElementOrbits&, const ElementOrbits&) = default;
};

struct BondClaim {
  std::string a, b;
  double length = 0.0;  // Angstrom
  bool uniform = false; // every bond rounds to the same length
  friend bool operator==(const BondClaim&, const BondClaim&) = default;
};

struct TraceRecord {
  // segment 1
  std::optional<std::string> formula;
  std::optional<std::string> spacegroup_symbol;
  std::optional<int> spacegroup_number;
  std::vector<ElementOrbits> orbits;
  bool has_equation = false;
  // segment 2
  std::vector<BondClaim> bonds;
  // segment 3
  std::optional<double> volume;
  std::optional<bool> reasonable;
  std::optional<std::string> band_gap_class;
  std::optional<double> band_gap;
  std::optional<bool> on_hull;
  std::optional<double> e_hull;
  std::optional<double> formation_energy;
  std::vector<std::string> flags;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SynthesizedTrace {
  TraceRecord record;
  std::string text;
};

struct TraceConsistency {
  bool site_match = false;
  std::optional<double> volume_rel_diff;
  std::optional<double> bond_rel_diff;
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

// Neighbours of site i within factor times its nearest-neighbour distance,
// counting every periodic image.
inline std::vector<Neighbor> coordination_shell(const CrystalStructure& s, std::size_t i,
                                                double factor = kCoordinationShellFactor) {
  const Mat3& m = s.lattice().matrix();
  const Vec3 h = s.lattice().face_heights();
  const Vec3 len = s.lattice().lengths();
  const double reach = factor * std::min({len[0], len[1], len[2]});
  int range[3];
  for (int k = 0; k < 3; ++k) range[k] = static_cast<int>(std::ceil(reach / h[k])) + 1;
  std::vector<Neighbor> all;
  double nn = INFINITY;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Vec3 d0 = wrap_centered(s.sites()[j].frac - s.sites()[i].frac);
    for (int a = -range[0]; a <= range[0]; ++a)
      for (int b = -range[1]; b <= range[1]; ++b)
        for (int c = -range[2]; c <= range[2]; ++c) {
          if (i == j && a == 0 && b == 0 && c == 0) continue;
          const double d = norm(row_times(Vec3{d0[0] + a, d0[1] + b, d0[2] + c}, m));
          if (d > reach) continue;
          all.push_back({j, d});
          nn = std::min(nn, d);
        }
  }
  std::vector<Neighbor> out;
  for (const auto& n : all)
    if (n.distance <= factor * nn) out.push_back(n);
  std::sort(out.begin(), out.end(), [](const Neighbor& x, const Neighbor& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.index < y.index;
  });
  return out;
}

struct BondStats {
  double mean = 0.0, min = 0.0, max = 0.0;
  std::size_t count = 0;
};

// Bond-length statistics per unordered element pair, keyed with the element
// that appears first in the structure on the left.
inline std::map<std::pair<std::string, std::string>, BondStats> bond_statistics(
    const CrystalStructure& s, double factor = kCoordinationShellFactor) {
  const auto order = s.species_order();
  auto rank = [&](const std::string& e) { return std::find(order.begin(), order.end(), e) - order.begin(); };
  std::map<std::pair<std::string, std::string>, std::vector<double>> lists;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (const auto& n : coordination_shell(s, i, factor)) {
      std::string a = s.sites()[i].element, b = s.sites()[n.index].element;
      if (rank(b) < rank(a)) std::swap(a, b);
      lists[{a, b}].push_back(n.distance);
    }
  std::map<std::pair<std::string, std::string>, BondStats> out;
  for (auto& [k, v] : lists) {
    BondStats st;
    st.count = v.size();
    st.min = *std::min_element(v.begin(), v.end());
    st.max = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double d : v) sum += d;
    st.mean = sum / static_cast<double>(v.size());
    out[k] = st;
  }
  return out;
}

namespace traces_detail {

inline std::string number_word(std::size_t n) {
  static const char* words[] = {"zero", "one", "two",   "three", "four",   "five",  "six",
                                "seven", "eight", "nine", "ten",   "eleven", "twelve"};
  return n < 13 ? words[n] : std::to_string(n);
}

inline std::string signed_state(int s) { return s > 0 ? "+" + std::to_string(s) : std::to_string(s); }

inline std::string ion(const std::string& el, const std::optional<OxidationAssignment>& ox) {
  if (!ox) return el;
  auto it = ox->find(el);
  if (it == ox->end() || it->second == 0) return el;
  const int q = std::abs(it->second);
  return el + (q == 1 ? "" : std::to_string(q)) + (it->second > 0 ? "+" : "-");
}

inline std::string band_class(double gap) {
  if (gap < kMetalGapBelow) return "metal";
  if (gap < kSemiconductorGapBelow) return "semiconductor";
  return "insulator (wide band gap)";
}

inline std::string article(const std::string& cls) { return cls[0] == 'i' ? "an " : "a "; }

inline std::string geometry(std::size_t cn) {
  switch (cn) {
    case 6: return " in an octahedral geometry";
    case 4: return " in a tetrahedral geometry";
    case 3: return " in a trigonal planar geometry";
    default: return "";
  }
}

inline std::optional<double> to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

}  // namespace traces_detail

// Per-element orbit sizes in the structure's species order, sizes descending.
inline std::vector<ElementOrbits> orbit_summary(const CrystalStructure& s, const SpacegroupResult& sym) {
  std::vector<ElementOrbits> out;
  for (const auto& el : s.species_order()) {
    ElementOrbits eo{el, {}, std::nullopt};
    for (const auto& orbit : sym.orbits)
      if (!orbit.empty() && s.sites()[orbit.front()].element == el) eo.sizes.push_back(static_cast<int>(orbit.size()));
    std::sort(eo.sizes.rbegin(), eo.sizes.rend());
    out.push_back(std::move(eo));
  }
  return out;
}

inline SynthesizedTrace synthesize_trace(const CrystalStructure& s, const PromptConstraints& props,
                                         const SpacegroupResult& sym,
                                         const std::optional<OxidationAssignment>& oxidation) {
  namespace td = traces_detail;
  SynthesizedTrace out;
  TraceRecord& rec = out.record;
  std::string& t = out.text;
  const auto order = s.species_order();
  const Composition comp = s.composition().reduced();

  std::string formula;
  for (const auto& e : order) formula += e + (comp.count(e) == 1 ? "" : std::to_string(comp.count(e)));
  rec.formula = formula;
  rec.spacegroup_symbol = sym.symbol;
  rec.spacegroup_number = sym.number;
  rec.orbits = orbit_summary(s, sym);
  if (oxidation)
    for (auto& eo : rec.orbits) eo.oxidation = oxidation->at(eo.element);
  rec.has_equation = oxidation.has_value();
  if (!oxidation) rec.flags.emplace_back("no oxidation assignment");

  t += "Let's generate a material report first, according to the given information.\n\nMaterial Report:\n\n";
  t += "Crystal Structure\n";
  t += "First, consider space groups and atom numbers. This material " + formula + " should have the space group " +
       sym.symbol + " (id " + std::to_string(sym.number) + "). ";
  if (oxidation) {
    t += "Since ";
    std::string eq;
    for (std::size_t k = 0; k < rec.orbits.size(); ++k) {
      const auto& eo = rec.orbits[k];
      std::string lhs;
      for (std::size_t j = 0; j < eo.sizes.size(); ++j) lhs += (j ? "+" : "") + std::to_string(eo.sizes[j]);
      const int total = s.composition().count(eo.element);
      t += (k ? ", for " : "for ") + eo.element + ", " + lhs + "=" + std::to_string(total);
      eq += (k ? "+" : "") + std::to_string(total) + "*(" + td::signed_state(*eo.oxidation) + ")";
    }
    t += ", " + eq + "=0, the structure is like this: ";
  } else {
    t += "The structure is like this: ";
  }
  for (std::size_t k = 0; k < rec.orbits.size(); ++k) {
    const auto& eo = rec.orbits[k];
    t += (k ? " " : "") + eo.element + " has " + std::to_string(eo.sizes.size()) + " sites: ";
    for (std::size_t j = 0; j < eo.sizes.size(); ++j) {
      t += (j ? "; " : "") + std::string("one site has ") + std::to_string(eo.sizes[j]) + " atoms";
      if (eo.oxidation) t += ", oxidation state " + td::signed_state(*eo.oxidation);
    }
    t += ".";
  }
  t += "\n";

  // Segment 2: local environments.
  t += "Second, consider local environments.";
  const auto stats = bond_statistics(s);
  for (const auto& el : order) {
    for (const auto& orbit : sym.orbits) {
      if (orbit.empty() || s.sites()[orbit.front()].element != el) continue;
      const auto shell = coordination_shell(s, orbit.front());
      std::map<std::string, std::size_t> by_el;
      for (const auto& n : shell) ++by_el[s.sites()[n.index].element];
      std::string list;
      std::size_t parts = 0;
      for (const auto& other : order) {
        auto it = by_el.find(other);
        if (it == by_el.end()) continue;
        list += (parts++ ? " and " : "") + td::number_word(it->second) + " " + td::ion(other, oxidation);
      }
      t += " " + td::ion(el, oxidation) + " is bonded to " + list + (shell.size() == 1 ? " atom" : " atoms") +
           td::geometry(shell.size()) + ".";
    }
    for (const auto& [key, st] : stats) {
      if (key.first != el) continue;
      BondClaim bc{key.first, key.second, round_half_away(st.mean, kTraceBondDecimals),
                   format_fixed(st.min, kTraceBondDecimals) == format_fixed(st.max, kTraceBondDecimals)};
      const std::string pair = key.first + "-" + key.second;
      const std::string len = format_fixed(st.mean, kTraceBondDecimals);
      t += bc.uniform ? " All " + pair + " bond lengths are " + len + " Å."
                      : " The mean " + pair + " bond length is " + len + " Å.";
      rec.bonds.push_back(bc);
    }
  }
  t += "\n";

  // Segment 3: validity and properties.
  const double vol = s.volume();
  rec.volume = round_half_away(vol, kTraceVolumeDecimals);
  rec.reasonable = all_pair_min_distance(s) > 0.5 && vol > 0.1;
  t += std::string("Third, consider structure validity. The structure is ") + (*rec.reasonable ? "" : "not ") +
       "reasonable, because the bond lengths are " + (*rec.reasonable ? "all" : "not all") +
       " greater than 0.5, and the structure's volume " + format_fixed(vol, kTraceVolumeDecimals) + " is " +
       (vol > 0.1 ? "larger" : "not larger") + " than 0.1.\n";
  if (props.band_gap) {
    const double gap = *props.band_gap;
    rec.band_gap = round_half_away(gap, kTraceGapDecimals);
    rec.band_gap_class = td::band_class(gap);
    t += "\nElectronic Properties\nClassification: It is " + td::article(*rec.band_gap_class) + *rec.band_gap_class +
         " with a calculated band gap (E_g) of " + format_fixed(gap, kTraceGapDecimals) + " eV.\n";
  }
  if (props.e_hull_target || props.formation_energy_per_atom) {
    t += "\nStability\nThermodynamic Status:";
    if (props.e_hull_target) {
      rec.on_hull = *props.e_hull_target <= kOnHullAtMost;
      if (*rec.on_hull) {
        t += " It is predicted to be thermodynamically stable (on the hull).";
      } else {
        rec.e_hull = round_half_away(*props.e_hull_target, kTraceEnergyDecimals);
        t += " It is predicted to lie " + format_fixed(*props.e_hull_target, kTraceEnergyDecimals) +
             " eV/atom above the hull.";
      }
    }
    if (props.formation_energy_per_atom) {
      rec.formation_energy = round_half_away(*props.formation_energy_per_atom, kTraceEnergyDecimals);
      t += " The formation energy per atom is " + format_fixed(*props.formation_energy_per_atom, kTraceEnergyDecimals) +
           " eV/atom.";
    }
    t += "\n";
  }
  return out;
}

// Extracts what it can; anything not found stays absent.
inline TraceRecord parse_trace(const std::string& text) {
  namespace td = traces_detail;
  TraceRecord r;
  std::smatch m;
  static const std::regex formula_re(R"(This material (\S+) should have)");
  static const std::regex sg_re(R"(space group (\S+) \(id (\d+)\))");
  static const std::regex el_re(R"(([A-Z][a-z]?) has (\d+) sites?: ([^.]*)\.)");
  static const std::regex site_re(R"(one site has (\d+) atoms?(?:, oxidation state ([+-]?\d+))?)");
  static const std::regex eq_re(R"((?:\d+\*\([+-]?\d+\)\+?)+=0)");
  static const std::regex all_bond_re(R"(All ([A-Z][a-z]?)-([A-Z][a-z]?) bond lengths are ([0-9]+(?:\.[0-9]+)?))");
  static const std::regex mean_bond_re(R"(The mean ([A-Z][a-z]?)-([A-Z][a-z]?) bond length is ([0-9]+(?:\.[0-9]+)?))");
  static const std::regex vol_re(R"(volume ([0-9]+(?:\.[0-9]+)?) is)");
  static const std::regex reason_re(R"(The structure is (not )?reasonable)");
  static const std::regex gap_re(R"(It is an? (metal|semiconductor|insulator \(wide band gap\)) with a calculated band gap \(\$?E_g\$?\) of (-?[0-9]+(?:\.[0-9]+)?) eV)");
  static const std::regex hull_re(R"(predicted to lie (-?[0-9]+(?:\.[0-9]+)?) eV/atom above the hull)");
  static const std::regex form_re(R"(formation energy per atom is (-?[0-9]+(?:\.[0-9]+)?) eV/atom)");

  if (std::regex_search(text, m, formula_re)) r.formula = m[1].str();
  if (std::regex_search(text, m, sg_re)) {
    r.spacegroup_symbol = m[1].str();
    if (auto v = td::to_double(m[2].str())) r.spacegroup_number = static_cast<int>(*v);
  }
  for (auto it = std::sregex_iterator(text.begin(), text.end(), el_re); it != std::sregex_iterator(); ++it) {
    ElementOrbits eo{(*it)[1].str(), {}, std::nullopt};
    const std::string body = (*it)[3].str();
    bool consistent = true;
    for (auto jt = std::sregex_iterator(body.begin(), body.end(), site_re); jt != std::sregex_iterator(); ++jt) {
      eo.sizes.push_back(std::stoi((*jt)[1].str()));
      if ((*jt)[2].matched) {
        const int st = std::stoi((*jt)[2].str());
        if (eo.oxidation && *eo.oxidation != st) consistent = false;
        eo.oxidation = st;
      }
    }
    if (!consistent) r.flags.push_back("mixed oxidation states for " + eo.element);
    std::sort(eo.sizes.rbegin(), eo.sizes.rend());
    r.orbits.push_back(std::move(eo));
  }
  r.has_equation = std::regex_search(text, eq_re);
  for (const auto* re : {&all_bond_re, &mean_bond_re})
    for (auto it = std::sregex_iterator(text.begin(), text.end(), *re); it != std::sregex_iterator(); ++it)
      if (auto v = td::to_double((*it)[3].str()))
        r.bonds.push_back({(*it)[1].str(), (*it)[2].str(), *v, re == &all_bond_re});
  // Restore text order between the two sentence forms.
  std::stable_sort(r.bonds.begin(), r.bonds.end(), [&](const BondClaim& x, const BondClaim& y) {
    auto pos = [&](const BondClaim& b) { return text.find(b.a + "-" + b.b + " bond length"); };
    return pos(x) < pos(y);
  });
  if (std::regex_search(text, m, vol_re)) r.volume = td::to_double(m[1].str());
  if (std::regex_search(text, m, reason_re)) r.reasonable = !m[1].matched;
  if (std::regex_search(text, m, gap_re)) {
    r.band_gap_class = m[1].str();
    r.band_gap = td::to_double(m[2].str());
  }
  if (text.find("thermodynamically stable (on the hull)") != std::string::npos) {
    r.on_hull = true;
  } else if (std::regex_search(text, m, hull_re)) {
    r.on_hull = false;
    r.e_hull = td::to_double(m[1].str());
  }
  if (std::regex_search(text, m, form_re)) r.formation_energy = td::to_double(m[1].str());
  return r;
}

// Claimed numbers are compared with the measured ones rounded to the
// precision at which traces print them.
inline TraceConsistency trace_consistency(const TraceRecord& trace, const CrystalStructure& s,
                                          const SpacegroupResult& sym) {
  TraceConsistency c;
  std::map<std::string, std::vector<int>> claimed, actual;
  for (const auto& eo : trace.orbits) {
    auto& v = claimed[eo.element];
    v.insert(v.end(), eo.sizes.begin(), eo.sizes.end());
    std::sort(v.begin(), v.end());
  }
  for (const auto& eo : orbit_summary(s, sym)) {
    auto& v = actual[eo.element];
    v = eo.sizes;
    std::sort(v.begin(), v.end());
  }
  c.site_match = !claimed.empty() && claimed == actual;

  if (trace.volume) {
    const double v = s.volume();
    c.volume_rel_diff = std::fabs(*trace.volume - round_half_away(v, kTraceVolumeDecimals)) / v;
  }
  if (!trace.bonds.empty()) {
    const auto stats = bond_statistics(s);
    double sum = 0.0;
    for (const auto& b : trace.bonds) {
      auto it = stats.find({b.a, b.b});
      if (it == stats.end()) it = stats.find({b.b, b.a});
      if (it == stats.end()) {
        sum += 1.0;  // claimed bond between elements that are not neighbours
        continue;
      }
      const double mean = it->second.mean;
      sum += std::fabs(b.length - round_half_away(mean, kTraceBondDecimals)) / mean;
    }
    c.bond_rel_diff = sum / static_cast<double>(trace.bonds.size());
  }
  return c;
}

}  // namespace crystalign
