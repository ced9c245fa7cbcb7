#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crystalign/ciflite/prompt.hpp"
#include "crystalign/structcore/structure.hpp"
#include "crystalign/symmetry/detect.hpp"
#include "crystalign/validity/oxidation.hpp"

namespace crystalign {

struct ValidityThresholds {
  double min_pair_distance = 2.0;  // Angstrom
  double min_volume = 4.0;         // Angstrom^3
  double min_length = 1.1;         // Angstrom
  double angle_low = 20.0;         // degrees
  double angle_high = 160.0;

  void validate() const {
    if (!(min_pair_distance > 0 && min_volume > 0 && min_length > 0 && angle_low > 0 && angle_high > 0))
      throw ConfigError("validity thresholds must be positive");
    if (!(angle_low < angle_high)) throw ConfigError("angle range must satisfy low < high");
  }
};

struct CheckResult {
  bool ok = true;
  std::vector<std::string> reasons;
};

// Distance, volume and length tests are strict; the angle window is closed.
inline CheckResult check_structural(const CrystalStructure& s, const ValidityThresholds& t = {}) {
  CheckResult r;
  auto fail = [&](const char* why) {
    r.ok = false;
    r.reasons.emplace_back(why);
  };
  if (!(all_pair_min_distance(s) > t.min_pair_distance)) fail("distance");
  if (!(s.volume() > t.min_volume)) fail("volume");
  for (double l : s.lattice().lengths())
    if (!(l > t.min_length)) {
      fail("length");
      break;
    }
  for (double a : s.lattice().angles())
    if (!(a >= t.angle_low && a <= t.angle_high)) {
      fail("angle");
      break;
    }
  return r;
}

inline bool check_composition_match(const Composition& generated, const Composition& target) {
  return reduced_formula(generated) == reduced_formula(target);
}

inline CheckResult check_spacegroup_match(const CrystalStructure& s, int target,
                                          double tol = kDefaultSymmetryTolerance) {
  if (target < 1 || target > 230) throw DomainError("target space group outside [1, 230]");
  CheckResult r;
  try {
    const auto found = detect_spacegroup(s, tol);
    if (found.number != target) {
      r.ok = false;
      r.reasons.push_back("spacegroup " + std::to_string(found.number) + " != " + std::to_string(target));
    }
  } catch (const Error& e) {
    r.ok = false;
    r.reasons.push_back(std::string("symmetry detection failed: ") + e.what());
  }
  return r;
}

struct ValidityReport {
  bool parsed = true;
  bool structural = false;
  bool chemical = false;
  bool composition_match = false;
  std::optional<bool> spacegroup_match;
  std::vector<std::string> failed_checks;
  std::optional<OxidationAssignment> oxidation;  // witness of chemical validity

  static ValidityReport unparseable(const std::string& why) {
    ValidityReport r;
    r.parsed = false;
    r.failed_checks = {"parse: " + why};
    return r;
  }
};

struct ValidityOptions {
  ValidityThresholds thresholds;
  ChemicalOptions chemical;
  double symmetry_tolerance = kDefaultSymmetryTolerance;
  bool check_spacegroup = true;  // evaluated when the prompt names a group
};

// Runs every check a prompt calls for. A prompt without a formula imposes no
// composition constraint, so composition_match is then true.
inline ValidityReport assess_validity(const CrystalStructure& s, const PromptConstraints& prompt,
                                      const OxidationTable& table = OxidationTable::builtin(),
                                      const ValidityOptions& opt = {}) {
  ValidityReport r;
  const CheckResult st = check_structural(s, opt.thresholds);
  r.structural = st.ok;
  for (const auto& why : st.reasons) r.failed_checks.push_back("structural: " + why);

  try {
    r.oxidation = find_oxidation_assignment(s.composition(), table, opt.chemical);
    r.chemical = r.oxidation.has_value();
    if (!r.chemical) r.failed_checks.emplace_back("chemical: no charge-neutral assignment");
  } catch (const ConfigError& e) {
    r.chemical = false;
    r.failed_checks.push_back(std::string("chemical: ") + e.what());
  }

  r.composition_match = !prompt.formula || check_composition_match(s.composition(), *prompt.formula);
  if (!r.composition_match) r.failed_checks.emplace_back("composition: " + reduced_formula(s.composition()) +
                                                         " != " + reduced_formula(*prompt.formula));

  if (opt.check_spacegroup && prompt.spacegroup_number) {
    const CheckResult sg = check_spacegroup_match(s, *prompt.spacegroup_number, opt.symmetry_tolerance);
    r.spacegroup_match = sg.ok;
    for (const auto& why : sg.reasons) r.failed_checks.push_back("spacegroup: " + why);
  }
  return r;
}

}  // namespace crystalign
