#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "crystalign/symmetry/detect.hpp"
#include "crystalign/symmetry/table.hpp"
#include "fixtures.hpp"

using namespace crystalign;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(std::string(detail::trim(cur)));
  return out;
}

// Lattice whose metric is invariant under every rotation of the group:
// a group average of a random positive-definite metric.
Lattice invariant_lattice(const std::vector<SymmetryOp>& ops, std::mt19937_64& rng) {
  Mat3 g0{};
  const Lattice base(fixtures::uniform(rng, 4, 7), fixtures::uniform(rng, 4, 7), fixtures::uniform(rng, 4, 7),
                     fixtures::uniform(rng, 80, 100), fixtures::uniform(rng, 80, 100), fixtures::uniform(rng, 80, 100));
  g0 = base.metric();
  Mat3 g{};
  for (const auto& op : ops) {
    const Mat3 w = to_real(op.rotation);
    const Mat3 t = transpose(w) * g0 * w;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[i][j] += t[i][j];
  }
  auto len = [&](int i) { return std::sqrt(g[i][i]); };
  auto ang = [&](int i, int j) { return rad2deg(std::acos(g[i][j] / (len(i) * len(j)))); };
  const double scale = 5.0 / std::cbrt(std::sqrt(det(g)));
  return Lattice(scale * len(0), scale * len(1), scale * len(2), ang(1, 2), ang(0, 2), ang(0, 1));
}

// Orbit of two generic points (different species) under the closed group.
CrystalStructure orbit_structure(const std::vector<SymmetryOp>& ops, const Lattice& l, std::mt19937_64& rng) {
  std::vector<Site> sites;
  for (const char* el : {"Na", "Cl"}) {
    const Vec3 x{fixtures::uniform(rng, 0.05, 0.95), fixtures::uniform(rng, 0.05, 0.95), fixtures::uniform(rng, 0.05, 0.95)};
    std::vector<Vec3> seen;
    for (const auto& op : ops) {
      const Vec3 y = wrap01(apply(op, x));
      bool dup = false;
      for (const auto& z : seen) dup = dup || translation_distance(y, z) < 1e-6;
      if (!dup) {
        seen.push_back(y);
        sites.emplace_back(el, y);
      }
    }
  }
  return CrystalStructure(l, std::move(sites));
}

}  // namespace

TEST(Symmetry, ReferenceStructures) {
  EXPECT_EQ(detect_spacegroup(fixtures::calcite()).number, 167);
  EXPECT_EQ(detect_spacegroup(fixtures::rocksalt()).number, 225);
  EXPECT_EQ(detect_spacegroup(fixtures::cscl()).number, 221);
  EXPECT_EQ(detect_spacegroup(fixtures::diamond()).number, 227);
  EXPECT_EQ(detect_spacegroup(fixtures::hcp()).number, 194);
  EXPECT_EQ(detect_spacegroup(fixtures::bcc("Fe", 2.87)).number, 229);
}

TEST(Symmetry, StableAcrossTolerances) {
  for (const auto& s : {fixtures::calcite(), fixtures::rocksalt(), fixtures::cscl(), fixtures::diamond(), fixtures::hcp()})
    for (double tol : {1e-2, 1e-3, 1e-4}) EXPECT_EQ(detect_spacegroup(s, tol).number, detect_spacegroup(s).number);
}

TEST(Symmetry, OperationCountOfRocksaltConventionalCell) {
  // 48 point operations times 4 centring translations.
  EXPECT_EQ(detect_spacegroup(fixtures::rocksalt()).operations.size(), 192u);
}

TEST(Symmetry, CrystalSystemRanges) {
  EXPECT_EQ(crystal_system_for_number(1), CrystalSystem::Triclinic);
  EXPECT_EQ(crystal_system_for_number(15), CrystalSystem::Monoclinic);
  EXPECT_EQ(crystal_system_for_number(74), CrystalSystem::Orthorhombic);
  EXPECT_EQ(crystal_system_for_number(142), CrystalSystem::Tetragonal);
  EXPECT_EQ(crystal_system_for_number(167), CrystalSystem::Trigonal);
  EXPECT_EQ(crystal_system_for_number(194), CrystalSystem::Hexagonal);
  EXPECT_EQ(crystal_system_for_number(230), CrystalSystem::Cubic);
}

TEST(Symmetry, RejectsNonPositiveTolerance) { EXPECT_THROW(detect_spacegroup(fixtures::rocksalt(), 0.0), DomainError); }

TEST(Symmetry, StrongDistortionFallsToP1) {
  auto s = fixtures::rocksalt();
  std::vector<Site> sites = s.sites();
  std::mt19937_64 rng(1);
  for (auto& site : sites) site.frac = site.frac + Vec3{fixtures::uniform(rng, -0.05, 0.05), fixtures::uniform(rng, -0.05, 0.05), fixtures::uniform(rng, -0.05, 0.05)};
  EXPECT_EQ(detect_spacegroup(CrystalStructure(Lattice(5.3, 5.7, 6.1, 84, 93, 101), sites)).number, 1);
}

TEST(SymmetryProperty, InvariantUnderTranslationAndSupercell) {
  for (const auto& s : {fixtures::calcite(), fixtures::rocksalt(), fixtures::hcp()}) {
    const int n = detect_spacegroup(s).number;
    EXPECT_EQ(detect_spacegroup(s.translated({0.123, 0.456, 0.789})).number, n);
    EXPECT_EQ(detect_spacegroup(s.supercell(2, 1, 1)).number, n);
  }
}

// Oracle: 230 structures (one per group, random orientation and setting)
// labelled offline by an established symmetry toolkit.
TEST(SymmetryOracle, AgreesWithToolkitCorpus) {
  const std::string text = slurp(std::string(CRYSTALIGN_TEST_DATA) + "/symmetry_oracle.dat");
  ASSERT_FALSE(text.empty());
  std::size_t checked = 0;
  std::istringstream in(text);
  std::string line;
  int expected = 0;
  std::string block;
  bool in_block = false;
  while (std::getline(in, line)) {
    if (!in_block) {
      if (line.empty() || line[0] == '#') continue;
      const auto parts = split(line, '|');
      ASSERT_EQ(parts.size(), 2u) << line;
      expected = std::stoi(parts[1]);
      block.clear();
      in_block = true;
      continue;
    }
    block += line + "\n";
    if (line.find("</CIF>") != std::string::npos) {
      in_block = false;
      const auto s = parse_ciflite(block);
      EXPECT_EQ(detect_spacegroup(s).number, expected) << block;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 230u);
}

// Every Hall setting: build the orbit structure from its generators on an
// invariant lattice and recover the group number.
TEST(SymmetryProperty, RecoversEveryHallSetting) {
  const std::string text = slurp(std::string(CRYSTALIGN_TEST_DATA) + "/hall_settings.dat");
  std::istringstream in(text);
  std::string line;
  std::mt19937_64 rng(99);
  std::size_t checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, '|');
    ASSERT_GE(parts.size(), 2u);
    const int number = std::stoi(parts[1]);
    std::vector<SymmetryOp> gens;
    if (parts.size() > 2 && !parts[2].empty())
      for (const auto& t : split(parts[2], ';')) gens.push_back(parse_triplet(t));
    const auto ops = close_exact(gens);
    const auto s = orbit_structure(ops, invariant_lattice(ops, rng), rng);
    EXPECT_EQ(detect_spacegroup(s).number, number) << "hall " << parts[0];
    ++checked;
  }
  EXPECT_EQ(checked, 530u);
}

TEST(SiteOrbits, RocksaltHasOneOrbitPerSpecies) {
  const auto r = detect_spacegroup(fixtures::rocksalt());
  ASSERT_EQ(r.orbits.size(), 2u);
  EXPECT_EQ(r.orbits[0].size(), 4u);
  EXPECT_EQ(r.orbits[1].size(), 4u);
}

TEST(SiteOrbits, CalciteOrbitSizes) {
  const auto r = detect_spacegroup(fixtures::calcite());
  std::vector<std::size_t> sizes;
  for (const auto& o : r.orbits) sizes.push_back(o.size());
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 6}));
}
