#include <gtest/gtest.h>

#include <random>

#include "crystalign/energetics/backend.hpp"
#include "crystalign/energetics/hull.hpp"
#include "crystalign/energetics/properties.hpp"
#include "crystalign/energetics/relax.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crystalign;

namespace {

const PairPotentialBackend& lj() {
  static const PairPotentialBackend b;
  return b;
}

double total_energy(const CrystalStructure& s) { return lj().energy_per_atom(s) * static_cast<double>(s.size()); }

}  // namespace

TEST(PairParameters, ParsesAndMixes) {
  const auto p = PairParameters::parse("cutoff 9\nelement Ar 0.0104 3.40\nelement Kr 0.0140 3.65\npair Ar Ne 0.005 3.0\n");
  EXPECT_DOUBLE_EQ(p.cutoff(), 9.0);
  const auto m = p.pair("Kr", "Ar");
  EXPECT_NEAR(m.epsilon, std::sqrt(0.0104 * 0.0140), 1e-15);
  EXPECT_NEAR(m.sigma, 0.5 * (3.40 + 3.65), 1e-15);
  EXPECT_DOUBLE_EQ(p.pair("Ne", "Ar").sigma, 3.0);
  EXPECT_THROW(p.pair("Ar", "Xe"), ConfigError);
  EXPECT_THROW(PairParameters::parse("element Ar 1 1\n"), ConfigError);
  EXPECT_THROW(PairParameters::parse("cutoff 9\nelement Ar -1 1\n"), ConfigError);
}

TEST(PairPotential, TermVanishesAtCutoff) {
  const LjParams p{0.01, 3.4};
  EXPECT_EQ(PairPotentialBackend::pair_term(p, 8.5, 8.5).first, 0.0);
  EXPECT_NEAR(PairPotentialBackend::pair_term(p, 8.5 - 1e-9, 8.5).first, 0.0, 1e-12);
}

TEST(PairPotential, CutoffBelowTwoSigmaIsRejected) {
  auto p = PairParameters::builtin();
  p.set_cutoff(3.0);
  PairPotentialBackend b(p);
  EXPECT_THROW(b.energy_per_atom(fixtures::fcc("Ar", 5.3)), ConfigError);
}

// Oracle: an independent shifted-LJ sum over an image block covering twice the cutoff.
TEST(PairPotentialOracle, MatchesDirectSum) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const auto s = fixtures::random_structure(rng, {"Ar", "Kr", "Cu"}, 3);
    const double got = total_energy(s);
    const double want = oracles::lj_direct_energy(PairParameters::builtin(), s);
    EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, std::fabs(want))) << "trial " << trial;
  }
}

TEST(PairPotentialProperty, SupercellInvariance) {
  for (const auto& s : {fixtures::fcc("Cu", 3.6), fixtures::rocksalt("Na", "Cl", 5.64), fixtures::hcp("Mg")})
    EXPECT_NEAR(lj().energy_per_atom(s.supercell(2, 2, 1)), lj().energy_per_atom(s), 1e-10);
}

TEST(PairPotentialProperty, ForcesMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  const double h = 1e-5;
  for (int trial = 0; trial < 8; ++trial) {
    auto s = fixtures::random_structure(rng, {"Ar", "Kr"}, 3);
    s = s.with_lattice(s.lattice().scaled(1.5));  // keep atoms apart
    const auto f = forces(lj(), s);
    const Mat3 inv = inverse(s.lattice().matrix());
    for (std::size_t i = 0; i < s.size(); ++i)
      for (int d = 0; d < 3; ++d) {
        Vec3 dc{0, 0, 0};
        dc[d] = h;
        auto moved = [&](double sign) {
          auto sites = s.sites();
          sites[i].frac = sites[i].frac + row_times(sign * dc, inv);
          return total_energy(CrystalStructure(s.lattice(), sites));
        };
        const double fd = -(moved(1) - moved(-1)) / (2 * h);
        EXPECT_NEAR(f[i][d], fd, 1e-5 + 1e-5 * std::fabs(fd));
      }
  }
}

TEST(PairPotentialProperty, ForcesSumToZero) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = fixtures::random_structure(rng, {"Cu", "Ni"}, 5);
    const auto f = forces(lj(), s.with_lattice(s.lattice().scaled(1.3)));
    Vec3 sum{0, 0, 0};
    double scale = 0;
    for (const auto& v : f) sum += v, scale += norm(v);
    EXPECT_LE(norm(sum), 1e-12 * scale) << "total |f| " << scale;
  }
}

TEST(PairPotential, CoincidentAtomsRaise) {
  CrystalStructure s(Lattice(5, 5, 5, 90, 90, 90), {{"Ar", {0, 0, 0}}, {"Ar", {0, 0, 0}}});
  EXPECT_THROW(lj().energy_per_atom(s), NumericError);
}

TEST(FormationEnergy, ElementalReferenceIsZeroAtItsOptimum) {
  // The Cu reference is the minimum over simple lattices, so any Cu fcc cell is at or above it.
  EXPECT_GE(formation_energy(lj(), fixtures::fcc("Cu", 3.55)), -1e-9);
  EXPECT_GE(formation_energy(lj(), fixtures::fcc("Cu", 3.65)), -1e-9);
  EXPECT_THROW(formation_energy(lj(), fixtures::fcc("U", 3.6)), ConfigError);
}

TEST(Relax, LowersEnergyAndConverges) {
  auto s = fixtures::fcc("Cu", 3.61);
  auto sites = s.sites();
  sites[1].frac = sites[1].frac + Vec3{0.02, -0.01, 0.015};
  const CrystalStructure start(s.lattice(), sites);
  const auto r = relax_positions(lj(), start);
  EXPECT_LT(r.energy_per_atom, lj().energy_per_atom(start));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.max_force, 1e-3);
}

TEST(Relax, SymmetricStartIsAFixedPoint) {
  const auto s = fixtures::fcc("Cu", 3.61);
  const auto r = relax_positions(lj(), s);
  EXPECT_EQ(r.steps, 0);
  EXPECT_TRUE(r.converged);
}

TEST(Relax, DeadlineRaisesTimeout) {
  auto sites = fixtures::fcc("Ar", 5.3).sites();
  sites[0].frac = Vec3{0.03, 0.01, 0.0};
  RelaxOptions o;
  o.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  EXPECT_THROW(relax_positions(lj(), CrystalStructure(Lattice(5.3, 5.3, 5.3, 90, 90, 90), sites), o), TimeoutError);
}

TEST(Properties, BulkModulusOfCopperSurrogate) {
  // Positive and of the order of metallic moduli.
  const double b = bulk_modulus(lj(), fixtures::fcc("Cu", 3.6));
  EXPECT_GT(b, 100.0);
  EXPECT_LT(b, 300.0);
}

TEST(Properties, BulkModulusMatchesEnergyCurvature) {
  // Independent: fit E(V) at five volumes with a quadratic.
  const auto s = fixtures::fcc("Cu", 3.6);
  const double v0 = s.volume();
  std::vector<double> xs, ys;
  for (int k = -2; k <= 2; ++k) {
    const double dv = 0.002 * k;
    xs.push_back(dv * v0);
    ys.push_back(total_energy(s.with_lattice(s.lattice().scaled(std::cbrt(1 + dv)))));
  }
  // Second difference over the outer points (step 2h) and the inner ones (step h), Richardson combined.
  const double h = 0.002 * v0;
  const double d_inner = (ys[3] - 2 * ys[2] + ys[1]) / (h * h);
  const double d_outer = (ys[4] - 2 * ys[2] + ys[0]) / (4 * h * h);
  const double curv = (4 * d_inner - d_outer) / 3;
  EXPECT_NEAR(bulk_modulus(lj(), s), v0 * curv * kEvPerCubicAngstromInGpa, 0.5);
}

TEST(LinearProgram, SolvesSmallProblem) {
  // min -x - y s.t. x + y + s = 4, x + 3y + t = 6
  const auto r = solve_lp({{1, 1, 1, 0}, {1, 3, 0, 1}}, {4, 6}, {-1, -1, 0, 0});
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -4, 1e-12);
}

TEST(LinearProgram, DetectsInfeasibility) {
  EXPECT_EQ(solve_lp({{1, 1}, {1, 1}}, {1, 2}, {0, 0}).status, LpStatus::Infeasible);
}

TEST(Hull, BinaryTieLine) {
  const std::vector<PhaseEntry> refs{{parse_formula("Fe"), 0.0, "Fe"},
                                     {parse_formula("O"), 0.0, "O"},
                                     {parse_formula("FeO"), -1.0, "FeO"}};
  const auto r = energy_above_hull({parse_formula("Fe3O"), -0.3, "cand"}, refs);
  EXPECT_NEAR(r.hull_energy, -0.5, 1e-12);
  EXPECT_NEAR(r.e_hull, 0.2, 1e-12);
  EXPECT_EQ(r.decomposition.size(), 2u);
}

TEST(Hull, PhaseOnHullHasZeroDistanceUnlessExcludedByLabel) {
  const std::vector<PhaseEntry> refs{{parse_formula("Fe"), 0.0, "Fe"},
                                     {parse_formula("O"), 0.0, "O"},
                                     {parse_formula("FeO"), -1.0, "FeO"}};
  EXPECT_NEAR(energy_above_hull({parse_formula("FeO"), -1.0, ""}, refs).e_hull, 0.0, 1e-12);
  EXPECT_NEAR(energy_above_hull({parse_formula("FeO"), -1.0, "FeO"}, refs).e_hull, -1.0, 1e-12);
}

TEST(Hull, MissingElementIsACoverageError) {
  const std::vector<PhaseEntry> refs{{parse_formula("Fe"), 0.0, "Fe"}};
  try {
    energy_above_hull({parse_formula("FeO"), -1.0, ""}, refs);
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.missing(), std::vector<std::string>{"O"});
  }
}

TEST(Hull, StabilityThresholdIsStrict) {
  EXPECT_TRUE(is_stable(0.0159));
  EXPECT_FALSE(is_stable(0.016));
  EXPECT_THROW(is_stable(std::nan("")), DomainError);
}

TEST(Hull, ParsesPhaseFiles) {
  const auto p = parse_phases("# c\nA | Fe2O3 | -1.5\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].label, "A");
  EXPECT_EQ(p[0].composition.count("O"), 3);
  EXPECT_THROW(parse_phases("A | Fe"), ConfigError);
  EXPECT_THROW(parse_phases("A | Fe | x"), ConfigError);
  EXPECT_FALSE(builtin_phases().empty());
}

// Oracles: exact Caratheodory enumeration and a 1e-3 weight grid.
TEST(HullOracle, TernaryInstancesAgree) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracles::random_ternary_instance(rng);
    const double lp = energy_above_hull({inst.candidate, 0.0, ""}, inst.phases).hull_energy;
    const double exact = oracles::caratheodory_hull(inst.fractions, inst.x);
    EXPECT_NEAR(lp, exact, 1e-9) << "trial " << trial;
    EXPECT_NEAR(lp, oracles::grid_hull(inst.fractions, inst.x), 2e-3) << "trial " << trial;
  }
}

TEST(HullProperty, AddingAPhaseNeverRaisesTheHull) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = oracles::random_ternary_instance(rng, 3);
    const double before = energy_above_hull({inst.candidate, 0.0, ""}, inst.phases).hull_energy;
    inst.phases.push_back({parse_formula("FeNiO"), -0.3, "extra"});
    const double after = energy_above_hull({inst.candidate, 0.0, ""}, inst.phases).hull_energy;
    EXPECT_LE(after, before + 1e-12);
  }
}

TEST(HullProperty, HullEnergyIsAtMostEveryPhaseAtThatComposition) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracles::random_ternary_instance(rng);
    for (const auto& p : inst.phases) {
      const auto r = energy_above_hull({p.composition, p.energy_per_atom, ""}, inst.phases);
      EXPECT_GE(r.e_hull, -1e-12);
    }
  }
}
