// Regenerates data/reference_energies.dat and data/reference_phases.dat from
// the pair-potential parameters: elemental ground states over simple
// prototypes, then binary prototypes with negative formation energy.
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "crystalign/core/decimal.hpp"
#include "crystalign/energetics/backend.hpp"

using namespace crystalign;

namespace {

struct Prototype {
  std::string name;
  std::function<CrystalStructure(const std::string&, const std::string&, double)> build;
  bool binary;
};

CrystalStructure cubic(double a, std::vector<Site> sites) { return CrystalStructure(Lattice(a, a, a, 90, 90, 90), std::move(sites)); }

std::vector<Prototype> elemental() {
  return {
      {"fcc", [](const std::string& a, const std::string&, double x) {
         return cubic(x, {{a, {0, 0, 0}}, {a, {0.5, 0.5, 0}}, {a, {0.5, 0, 0.5}}, {a, {0, 0.5, 0.5}}});
       }, false},
      {"bcc", [](const std::string& a, const std::string&, double x) { return cubic(x, {{a, {0, 0, 0}}, {a, {0.5, 0.5, 0.5}}}); },
       false},
      {"sc", [](const std::string& a, const std::string&, double x) { return cubic(x, {{a, {0, 0, 0}}}); }, false},
      {"hcp", [](const std::string& a, const std::string&, double x) {
         return CrystalStructure(Lattice(x, x, x * std::sqrt(8.0 / 3.0), 90, 90, 120),
                                 {{a, {1.0 / 3, 2.0 / 3, 0.25}}, {a, {2.0 / 3, 1.0 / 3, 0.75}}});
       }, false},
  };
}

std::vector<Prototype> binaries() {
  return {
      {"rocksalt", [](const std::string& a, const std::string& b, double x) {
         return cubic(x, {{a, {0, 0, 0}}, {a, {0.5, 0.5, 0}}, {a, {0.5, 0, 0.5}}, {a, {0, 0.5, 0.5}},
                          {b, {0.5, 0, 0}}, {b, {0, 0.5, 0}}, {b, {0, 0, 0.5}}, {b, {0.5, 0.5, 0.5}}});
       }, true},
      {"CsCl", [](const std::string& a, const std::string& b, double x) { return cubic(x, {{a, {0, 0, 0}}, {b, {0.5, 0.5, 0.5}}}); },
       true},
      {"L12", [](const std::string& a, const std::string& b, double x) {
         return cubic(x, {{b, {0, 0, 0}}, {a, {0.5, 0.5, 0}}, {a, {0.5, 0, 0.5}}, {a, {0, 0.5, 0.5}}});
       }, true},
  };
}

// Minimum of f over [lo, hi]: coarse scan, then golden-section refinement.
double minimize(const std::function<double(double)>& f, double lo, double hi, double* arg) {
  const int n = 120;
  double best = INFINITY, bx = lo;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = f(x);
    if (v < best) best = v, bx = x;
  }
  const double step = (hi - lo) / n;
  double a = std::max(lo, bx - step), b = std::min(hi, bx + step);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a), fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
    else a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
  }
  const double x = (a + b) / 2, v = f(x);
  if (v < best) best = v, bx = x;
  if (arg) *arg = bx;
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: gen_reference_data <reference_energies.dat> <reference_phases.dat>\n";
    return 1;
  }
  const PairParameters& params = PairParameters::builtin();
  const PairPotentialBackend backend(params, {});
  std::map<std::string, double> refs;
  std::ofstream eout(argv[1]), pout(argv[2]);
  eout << "# elemental reference energies (eV/atom) for the builtin pair potential\n"
          "# minimum over fcc, bcc, sc and ideal hcp at the optimal lattice constant\n"
          "# regenerate with tools/gen_reference_data\n";
  pout << "# surrogate reference phases: label | formula | formation energy (eV/atom)\n"
          "# elements sit at 0; binaries are rocksalt, CsCl and L12 prototypes of the\n"
          "# builtin pair potential, kept when their formation energy is negative\n";
  for (const auto& [el, p] : params.elements()) {
    double best = INFINITY;
    std::string which;
    for (const auto& proto : elemental()) {
      const double e = minimize([&](double x) { return backend.energy_per_atom(proto.build(el, el, x)); },
                                0.8 * p.sigma, 2.5 * p.sigma, nullptr);
      if (e < best) best = e, which = proto.name;
    }
    refs[el] = best;
    eout << el << ' ' << format_fixed(best, 8) << '\n';
    pout << el << '-' << which << " | " << el << " | 0.000000\n";
  }
  for (auto i = refs.begin(); i != refs.end(); ++i)
    for (auto j = std::next(i); j != refs.end(); ++j)
      for (const auto& proto : binaries())
        for (int flip = 0; flip < (proto.name == "L12" ? 2 : 1); ++flip) {
          const std::string& a = flip ? j->first : i->first;
          const std::string& b = flip ? i->first : j->first;
          const double sig = std::max(params.pair(a, a).sigma, params.pair(b, b).sigma);
          double x = 0;
          minimize([&](double v) { return backend.energy_per_atom(proto.build(a, b, v)); }, 0.8 * sig, 3.0 * sig, &x);
          const CrystalStructure s = proto.build(a, b, x);
          const Composition c = s.composition();
          double ef = backend.energy_per_atom(s);
          for (const auto& [el, n] : c.counts()) ef -= c.fraction(el) * refs[el];
          if (ef < -1e-6) pout << reduced_formula(c) << '-' << proto.name << " | " << reduced_formula(c) << " | "
                               << format_fixed(ef, 6) << '\n';
        }
  return 0;
}
