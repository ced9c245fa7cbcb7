#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/data/pair_parameters.hpp"
#include "crystalign/data/reference_energies.hpp"
#include "crystalign/structcore/elements.hpp"
#include "crystalign/structcore/structure.hpp"

namespace crystalign {

struct EnergyForces {
  double energy = 0.0;       // total, eV
  std::vector<Vec3> forces;  // eV/Angstrom, Cartesian, one per site
};

// Energy oracle consumed by relaxation, formation energy and hull code.
class EnergyBackend {
 public:
  virtual ~EnergyBackend() = default;
  virtual double energy_per_atom(const CrystalStructure& s) const = 0;
  virtual std::optional<EnergyForces> energy_and_forces(const CrystalStructure&) const { return std::nullopt; }
  // Elemental reference energies (eV/atom) for formation energies.
  virtual const std::map<std::string, double>& reference_energies() const = 0;
};

inline std::vector<Vec3> forces(const EnergyBackend& b, const CrystalStructure& s) {
  auto ef = b.energy_and_forces(s);
  if (!ef) throw ConfigError("energy backend does not provide forces");
  return std::move(ef->forces);
}

namespace energetics_detail {

inline std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t s = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > s) out.push_back(line.substr(s, i - s));
  }
  return out;
}

inline double number(std::string_view w, const std::string& where) {
  try {
    std::size_t used = 0;
    const std::string s(w);
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(where + ": bad number '" + std::string(w) + "'");
  }
}

template <class Fn>
void each_line(std::string_view text, const char* what, Fn&& fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    fn(words(body), std::string(what) + " line " + std::to_string(n));
  }
}

inline void require_element(std::string_view el, const std::string& where) {
  if (!is_element_symbol(std::string(el))) throw ConfigError(where + ": unknown element '" + std::string(el) + "'");
}

}  // namespace energetics_detail

struct LjParams {
  double epsilon = 0.0;  // eV
  double sigma = 0.0;    // Angstrom
};

// Per-element Lennard-Jones parameters, explicit pair overrides and a cutoff.
class PairParameters {
 public:
  static PairParameters parse(std::string_view text) {
    namespace ed = energetics_detail;
    PairParameters p;
    ed::each_line(text, "pair-parameter file", [&](const auto& w, const std::string& where) {
      if (w[0] == "cutoff" && w.size() == 2) {
        p.cutoff_ = ed::number(w[1], where);
      } else if (w[0] == "element" && w.size() == 4) {
        ed::require_element(w[1], where);
        p.set_element(std::string(w[1]), {ed::number(w[2], where), ed::number(w[3], where)});
      } else if (w[0] == "pair" && w.size() == 5) {
        ed::require_element(w[1], where);
        ed::require_element(w[2], where);
        p.set_pair(std::string(w[1]), std::string(w[2]), {ed::number(w[3], where), ed::number(w[4], where)});
      } else {
        throw ConfigError(where + ": expected 'cutoff r', 'element El eps sigma' or 'pair A B eps sigma'");
      }
    });
    if (!(p.cutoff_ > 0)) throw ConfigError("pair-parameter file: missing positive cutoff");
    return p;
  }

  static const PairParameters& builtin() {
    static const PairParameters p = parse(data::pair_parameters);
    return p;
  }

  void set_element(const std::string& el, LjParams v) {
    check(v, el);
    elements_[el] = v;
  }
  void set_pair(const std::string& a, const std::string& b, LjParams v) {
    check(v, a + "-" + b);
    pairs_[key(a, b)] = v;
  }
  void set_cutoff(double rc) {
    if (!(rc > 0)) throw ConfigError("cutoff must be positive");
    cutoff_ = rc;
  }
  double cutoff() const noexcept { return cutoff_; }
  bool has_element(const std::string& el) const { return elements_.count(el) != 0; }
  const std::map<std::string, LjParams>& elements() const noexcept { return elements_; }

  // Explicit pair entry, else Lorentz-Berthelot mixing of the element entries.
  LjParams pair(const std::string& a, const std::string& b) const {
    if (auto it = pairs_.find(key(a, b)); it != pairs_.end()) return it->second;
    auto ia = elements_.find(a), ib = elements_.find(b);
    if (ia == elements_.end() || ib == elements_.end())
      throw ConfigError("no pair-potential parameters for " + a + "-" + b);
    return {std::sqrt(ia->second.epsilon * ib->second.epsilon), 0.5 * (ia->second.sigma + ib->second.sigma)};
  }

 private:
  std::map<std::string, LjParams> elements_;
  std::map<std::pair<std::string, std::string>, LjParams> pairs_;
  double cutoff_ = 0.0;

  static std::pair<std::string, std::string> key(const std::string& a, const std::string& b) {
    return a < b ? std::pair(a, b) : std::pair(b, a);
  }
  static void check(const LjParams& v, const std::string& what) {
    if (!(v.epsilon > 0 && v.sigma > 0)) throw ConfigError("non-positive LJ parameters for " + what);
  }
};

// Format: one "El energy" line per element (eV/atom).
inline std::map<std::string, double> parse_reference_energies(std::string_view text) {
  namespace ed = energetics_detail;
  std::map<std::string, double> out;
  ed::each_line(text, "reference-energy file", [&](const auto& w, const std::string& where) {
    if (w.size() != 2) throw ConfigError(where + ": expected 'Element energy'");
    ed::require_element(w[0], where);
    out[std::string(w[0])] = ed::number(w[1], where);
  });
  return out;
}

inline const std::map<std::string, double>& builtin_reference_energies() {
  static const auto refs = parse_reference_energies(data::reference_energies);
  return refs;
}

// 12-6 Lennard-Jones summed over every periodic image inside the cutoff and
// shifted so each pair term vanishes at the cutoff.
class PairPotentialBackend final : public EnergyBackend {
 public:
  explicit PairPotentialBackend(PairParameters params = PairParameters::builtin(),
                                std::map<std::string, double> refs = builtin_reference_energies())
      : params_(std::move(params)), refs_(std::move(refs)) {}

  const PairParameters& parameters() const noexcept { return params_; }
  const std::map<std::string, double>& reference_energies() const override { return refs_; }

  double energy_per_atom(const CrystalStructure& s) const override {
    return evaluate(s, false).energy / static_cast<double>(s.size());
  }
  std::optional<EnergyForces> energy_and_forces(const CrystalStructure& s) const override { return evaluate(s, true); }

  // Pair energy and its radial derivative for one parameter set.
  static std::pair<double, double> pair_term(const LjParams& p, double r, double rc) {
    if (r >= rc) return {0.0, 0.0};
    auto lj = [&](double x) {
      const double q = p.sigma * p.sigma / (x * x);
      const double s6 = q * q * q;
      return 4.0 * p.epsilon * (s6 * s6 - s6);
    };
    const double q = p.sigma * p.sigma / (r * r);
    const double s6 = q * q * q;
    const double du = 4.0 * p.epsilon * (-12.0 * s6 * s6 + 6.0 * s6) / r;
    return {lj(r) - lj(rc), du};
  }

 private:
  PairParameters params_;
  std::map<std::string, double> refs_;

  EnergyForces evaluate(const CrystalStructure& s, bool want_forces) const {
    const std::size_t n = s.size();
    const double rc = params_.cutoff();
    std::vector<std::string> species;
    std::vector<std::size_t> kind(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& el = s.sites()[i].element;
      auto it = std::find(species.begin(), species.end(), el);
      kind[i] = static_cast<std::size_t>(it - species.begin());
      if (it == species.end()) species.push_back(el);
    }
    std::vector<std::vector<LjParams>> table(species.size(), std::vector<LjParams>(species.size()));
    for (std::size_t a = 0; a < species.size(); ++a)
      for (std::size_t b = 0; b < species.size(); ++b) {
        table[a][b] = params_.pair(species[a], species[b]);
        if (rc < 2.0 * table[a][b].sigma)
          throw ConfigError("cutoff " + std::to_string(rc) + " is below 2 sigma for " + species[a] + "-" + species[b]);
      }

    const Mat3& m = s.lattice().matrix();
    const Vec3 h = s.lattice().face_heights();
    int range[3];
    for (int k = 0; k < 3; ++k) range[k] = static_cast<int>(std::ceil(rc / h[k])) + 1;

    EnergyForces out;
    if (want_forces) out.forces.assign(n, Vec3{0, 0, 0});
    const double rc2 = rc * rc;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const LjParams& p = table[kind[i]][kind[j]];
        const Vec3 d0 = wrap_centered(s.sites()[j].frac - s.sites()[i].frac);
        const double weight = i == j ? 0.5 : 1.0;
        for (int a = -range[0]; a <= range[0]; ++a)
          for (int b = -range[1]; b <= range[1]; ++b)
            for (int c = -range[2]; c <= range[2]; ++c) {
              if (i == j && a == 0 && b == 0 && c == 0) continue;
              const Vec3 r = row_times(Vec3{d0[0] + a, d0[1] + b, d0[2] + c}, m);
              const double r2 = dot(r, r);
              if (r2 >= rc2) continue;
              const double dist = std::sqrt(r2);
              if (!(dist > 0)) throw NumericError("coincident atoms " + std::to_string(i) + " and " + std::to_string(j));
              const auto [u, du] = pair_term(p, dist, rc);
              out.energy += weight * u;
              if (want_forces && i != j) {
                const Vec3 f = (du / dist) * r;  // force on i
                out.forces[i] += f;
                out.forces[j] -= f;
              }
            }
      }
    }
    return out;
  }
};

// Energy per atom relative to the composition-weighted elemental references.
inline double formation_energy(const EnergyBackend& backend, const CrystalStructure& s) {
  const auto& refs = backend.reference_energies();
  const Composition c = s.composition();
  double ref = 0.0;
  for (const auto& [el, count] : c.counts()) {
    auto it = refs.find(el);
    if (it == refs.end()) throw ConfigError("no elemental reference energy for " + el);
    ref += static_cast<double>(count) / c.total() * it->second;
  }
  return backend.energy_per_atom(s) - ref;
}

}  // namespace crystalign
