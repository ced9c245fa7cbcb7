#include <gtest/gtest.h>

#include <random>

#include "crystalign/traces/trace.hpp"
#include "fixtures.hpp"

using namespace crystalign;

namespace {

SynthesizedTrace trace_of(const CrystalStructure& s, const PromptConstraints& p = {}) {
  return synthesize_trace(s, p, detect_spacegroup(s), find_oxidation_assignment(s.composition(), OxidationTable::builtin()));
}

}  // namespace

TEST(Trace, CalciteSegments) {
  PromptConstraints p;
  p.band_gap = 4.9995;
  p.e_hull_target = 0.0;
  p.formation_energy_per_atom = -2.688;
  const auto t = trace_of(fixtures::calcite(), p);
  const std::string& x = t.text;
  EXPECT_NE(x.find("This material CaCO3 should have the space group R-3c (id 167)."), std::string::npos) << x;
  EXPECT_NE(x.find("2*(+2)+2*(+4)+6*(-2)=0"), std::string::npos) << x;
  EXPECT_NE(x.find("Ca has 1 sites: one site has 2 atoms, oxidation state +2."), std::string::npos) << x;
  EXPECT_NE(x.find("Ca2+ is bonded to six O2- atoms in an octahedral geometry."), std::string::npos) << x;
  EXPECT_NE(x.find("All Ca-O bond lengths are 2.36"), std::string::npos) << x;
  EXPECT_NE(x.find("structure's volume 122.95 is larger than 0.1"), std::string::npos) << x;
  EXPECT_NE(x.find("(E_g) of 5.000 eV"), std::string::npos) << x;
  EXPECT_NE(x.find("thermodynamically stable (on the hull)"), std::string::npos) << x;
  EXPECT_NE(x.find("The formation energy per atom is -2.688 eV/atom."), std::string::npos) << x;
}

TEST(Trace, OptionalSectionsAreOmitted) {
  const auto t = trace_of(fixtures::rocksalt());
  EXPECT_EQ(t.text.find("band gap"), std::string::npos);
  EXPECT_EQ(t.text.find("hull"), std::string::npos);
  EXPECT_FALSE(t.record.band_gap);
}

TEST(Trace, ParseRecoversRecord) {
  PromptConstraints p;
  p.band_gap = 1.2;
  p.e_hull_target = 0.0421;
  const auto t = trace_of(fixtures::calcite(), p);
  EXPECT_EQ(parse_trace(t.text), t.record);
}

TEST(Trace, ParseToleratesMathMarkup) {
  const auto r = parse_trace("Classification: It is a semiconductor with a calculated band gap ($E_g$) of 1.100 eV.");
  ASSERT_TRUE(r.band_gap);
  EXPECT_DOUBLE_EQ(*r.band_gap, 1.1);
  EXPECT_EQ(r.band_gap_class, "semiconductor");
}

TEST(Trace, GarbageParsesToEmptyRecord) {
  const auto r = parse_trace("nothing to see here");
  EXPECT_TRUE(r.orbits.empty());
  EXPECT_FALSE(r.volume);
}

TEST(Consistency, DetectsWrongVolumeAndSites) {
  const auto s = fixtures::rocksalt();
  const auto rec = parse_trace(trace_of(s).text);
  const auto bigger = s.with_lattice(s.lattice().scaled(1.1));
  const auto c = trace_consistency(rec, bigger, detect_spacegroup(bigger));
  EXPECT_TRUE(c.site_match);
  ASSERT_TRUE(c.volume_rel_diff);
  EXPECT_NEAR(*c.volume_rel_diff, 1 - 1 / 1.331, 1e-3);
  ASSERT_TRUE(c.bond_rel_diff);
  EXPECT_GT(*c.bond_rel_diff, 0.05);
  const auto other = fixtures::cscl();
  EXPECT_FALSE(trace_consistency(rec, other, detect_spacegroup(other)).site_match);
}

TEST(ConsistencyProperty, SelfConsistentOnCorpus) {
  std::mt19937_64 rng(101);
  for (const auto& s : fixtures::mixed_corpus(rng, 100)) {
    const auto sym = detect_spacegroup(s);
    const auto t = trace_of(s);
    const auto c = trace_consistency(parse_trace(t.text), s, sym);
    EXPECT_TRUE(c.site_match) << t.text;
    ASSERT_TRUE(c.volume_rel_diff);
    ASSERT_TRUE(c.bond_rel_diff);
    EXPECT_LE(*c.volume_rel_diff, 1e-6);
    EXPECT_LE(*c.bond_rel_diff, 1e-6) << t.text;
  }
}

TEST(Bonds, RocksaltShell) {
  const auto s = fixtures::rocksalt();
  EXPECT_EQ(coordination_shell(s, 0).size(), 6u);
  const auto stats = bond_statistics(s);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_NEAR(stats.begin()->second.mean, 2.82, 1e-12);
}
