#include <gtest/gtest.h>

#include <random>

#include "crystalign/validity/checks.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crystalign;

namespace {

CrystalStructure cell(double a, double b, double c, double al, double be, double ga, double sep = 2.5) {
  return CrystalStructure(Lattice(a, b, c, al, be, ga), {{"Na", {0, 0, 0}}, {"Cl", {sep / a, 0, 0}}});
}

}  // namespace

TEST(Structural, RocksaltPasses) { EXPECT_TRUE(check_structural(fixtures::rocksalt()).ok); }

TEST(Structural, CalciteFailsTheDistanceThreshold) {
  const auto r = check_structural(fixtures::calcite());
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.reasons, std::vector<std::string>{"distance"});
}

TEST(Structural, DistanceThresholdIsStrict) {
  ValidityThresholds t;
  EXPECT_FALSE(check_structural(cell(8, 8, 8, 90, 90, 90, 2.0), t).ok);
  EXPECT_TRUE(check_structural(cell(8, 8, 8, 90, 90, 90, 2.0 + 1e-9), t).ok);
}

TEST(Structural, VolumeLengthAndAngleWindows) {
  ValidityThresholds t;
  t.min_pair_distance = 0.1;
  // Volume exactly 4 fails; lengths of exactly 1.1 fail.
  CrystalStructure v4(Lattice(1.6, 1.6, 4.0 / (1.6 * 1.6), 90, 90, 90), {{"H", {0, 0, 0}}});
  EXPECT_FALSE(check_structural(v4, t).ok);
  CrystalStructure l11(Lattice(1.1, 4, 4, 90, 90, 90), {{"H", {0, 0, 0}}});
  EXPECT_EQ(check_structural(l11, t).reasons, std::vector<std::string>{"length"});
  // Angles at the closed window edges pass; just outside fails.
  CrystalStructure a20(Lattice(6, 6, 6, 90, 90, 160), {{"H", {0, 0, 0}}});
  EXPECT_TRUE(check_structural(a20, t).ok);
  CrystalStructure a161(Lattice(6, 6, 6, 90, 90, 160.5), {{"H", {0, 0, 0}}});
  EXPECT_EQ(check_structural(a161, t).reasons, std::vector<std::string>{"angle"});
}

TEST(Chemical, CalciteAssignment) {
  const auto a = find_oxidation_assignment(parse_formula("CaCO3"), OxidationTable::builtin());
  ASSERT_TRUE(a);
  int sum = 0;
  for (const auto& [el, st] : *a) sum += parse_formula("CaCO3").count(el) * st;
  EXPECT_EQ(sum, 0);
  EXPECT_EQ(a->at("Ca"), 2);
  EXPECT_EQ(a->at("C"), 4);
  EXPECT_EQ(a->at("O"), -2);
}

TEST(Chemical, ImpossibleCompositionsFail) {
  EXPECT_FALSE(check_chemical(parse_formula("NaCl2")));
  EXPECT_FALSE(check_chemical(parse_formula("Na2Mg")));  // all-metal alloy, default off
  EXPECT_TRUE(check_chemical(parse_formula("NaCl")));
  EXPECT_TRUE(check_chemical(parse_formula("Cu")));  // elemental
}

TEST(Chemical, AlloyAndElementalOptions) {
  ChemicalOptions o;
  o.metal_alloys_valid = true;
  EXPECT_TRUE(check_chemical(parse_formula("Na2Mg"), OxidationTable::builtin(), o));
  o.single_element_valid = false;
  o.metal_alloys_valid = false;
  EXPECT_FALSE(check_chemical(parse_formula("Cu"), OxidationTable::builtin(), o));
}

TEST(Chemical, PaulingScreenRejectsInvertedAssignment) {
  // With the screen on, O must stay the anion in MgO.
  ChemicalOptions o;
  o.pauling_screen = true;
  const auto a = find_oxidation_assignment(parse_formula("MgO"), OxidationTable::builtin(), o);
  ASSERT_TRUE(a);
  EXPECT_LT(a->at("O"), 0);
}

TEST(OxidationTable, ParsesAndRejects) {
  const auto t = OxidationTable::parse("# comment\nNa: +1\nCl: -1, 1, 3\n");
  EXPECT_EQ(t.states("Cl"), (std::vector<int>{-1, 1, 3}));
  EXPECT_THROW(OxidationTable::parse("Na +1"), ConfigError);
  EXPECT_THROW(OxidationTable::parse("Qq: 1"), ConfigError);
  EXPECT_THROW(OxidationTable::parse("Na: 1\nNa: 2"), ConfigError);
}

// Oracle: plain product enumeration over the table.
TEST(ChemicalOracle, AgreesWithBruteForce) {
  const std::vector<std::string> pool{"Na", "K", "Mg", "Ca", "Al", "Fe", "Cu", "Zn", "Ti", "Mn", "C", "N",
                                      "O",  "F", "S",  "Cl", "P",  "Si", "Se", "Br", "I",  "Li", "Ba", "V"};
  std::mt19937_64 rng(17);
  int agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, int> counts;
    const std::size_t k = 1 + fixtures::pick(rng, 4);
    while (counts.size() < k) counts[pool[fixtures::pick(rng, pool.size())]] = 1 + static_cast<int>(fixtures::pick(rng, 6));
    const Composition c(counts);
    ChemicalOptions o;
    o.single_element_valid = false;
    const auto got = find_oxidation_assignment(c, OxidationTable::builtin(), o);
    ASSERT_EQ(got.has_value(), oracles::neutral_assignment_exists(c.reduced(), OxidationTable::builtin()))
        << reduced_formula(c);
    if (got) {
      long sum = 0;
      for (const auto& [el, st] : *got) sum += static_cast<long>(c.count(el)) * st;
      EXPECT_EQ(sum, 0);
    }
    ++agree;
  }
  EXPECT_EQ(agree, 200);
}

// The meet-in-the-middle path must agree with plain enumeration.
TEST(ChemicalProperty, MeetInTheMiddleMatchesEnumeration) {
  const std::vector<std::string> pool{"Fe", "Mn", "Co", "Cr", "V", "O", "S", "N", "Cl", "Ti"};
  std::mt19937_64 rng(23);
  ChemicalOptions small;
  small.enumeration_cap = 1;
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, int> counts;
    const std::size_t k = 2 + fixtures::pick(rng, 4);
    while (counts.size() < k) counts[pool[fixtures::pick(rng, pool.size())]] = 1 + static_cast<int>(fixtures::pick(rng, 7));
    const Composition c(counts);
    EXPECT_EQ(check_chemical(c, OxidationTable::builtin(), small), check_chemical(c)) << reduced_formula(c);
  }
}

TEST(Assess, CalcitePromptReport) {
  PromptConstraints p;
  p.formula = parse_formula("CaCO3");
  p.spacegroup_number = 167;
  const auto r = assess_validity(fixtures::calcite(), p);
  EXPECT_TRUE(r.parsed);
  EXPECT_FALSE(r.structural);
  EXPECT_TRUE(r.chemical);
  EXPECT_TRUE(r.composition_match);
  ASSERT_TRUE(r.spacegroup_match);
  EXPECT_TRUE(*r.spacegroup_match);
}

TEST(Assess, CompositionMatchComparesReducedFormulas) {
  PromptConstraints p;
  p.formula = parse_formula("Na2Cl2");
  EXPECT_TRUE(assess_validity(fixtures::rocksalt(), p).composition_match);
  p.formula = parse_formula("NaCl2");
  EXPECT_FALSE(assess_validity(fixtures::rocksalt(), p).composition_match);
  EXPECT_TRUE(assess_validity(fixtures::rocksalt(), PromptConstraints{}).composition_match);
}

TEST(Assess, SpacegroupMismatchIsReported) {
  PromptConstraints p;
  p.spacegroup_number = 221;
  const auto r = assess_validity(fixtures::rocksalt(), p);
  ASSERT_TRUE(r.spacegroup_match);
  EXPECT_FALSE(*r.spacegroup_match);
}
