#pragma once

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/data/reference_phases.hpp"
#include "crystalign/structcore/composition.hpp"

namespace crystalign {

inline constexpr double kStabilityThreshold = 0.016;  // eV/atom

struct PhaseEntry {
  Composition composition;
  double energy_per_atom = 0.0;  // eV/atom
  std::string label;
};

struct HullResult {
  double e_hull = 0.0;
  double hull_energy = 0.0;  // lower-envelope energy at the candidate composition
  std::vector<std::pair<PhaseEntry, double>> decomposition;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

// minimize c.x subject to A x = b, x >= 0, with b >= 0. Dense two-phase
// simplex with Bland's rule, so it cannot cycle.
inline LpSolution solve_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                           const std::vector<double>& c, double tol = 1e-9) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  const std::size_t cols = n + m;  // structural + artificial
  const std::size_t rhs = cols;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != n) throw DomainError("LP row length mismatch");
    if (b[i] < -tol) throw DomainError("LP right-hand side must be non-negative");
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1.0;
    t[i][rhs] = std::max(0.0, b[i]);
    basis[i] = n + i;
  }

  std::vector<double> d(cols + 1, 0.0);
  auto set_costs = [&](const std::vector<double>& cost) {
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t j = 0; j < cols; ++j) d[j] = cost[j];
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) d[j] -= cb * t[i][j];
    }
  };
  auto pivot = [&](std::size_t r, std::size_t e) {
    const double p = t[r][e];
    for (auto& v : t[r]) v /= p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || t[i][e] == 0.0) continue;
      const double f = t[i][e];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    const double f = d[e];
    if (f != 0.0)
      for (std::size_t j = 0; j <= cols; ++j) d[j] -= f * t[r][j];
    basis[r] = e;
  };
  // Returns false when unbounded.
  auto run = [&](std::size_t allowed) {
    for (std::size_t iter = 0; iter < 50000; ++iter) {
      std::size_t e = cols;
      for (std::size_t j = 0; j < allowed; ++j)
        if (d[j] < -tol) {
          e = j;
          break;
        }
      if (e == cols) return true;
      std::size_t r = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][e] <= tol) continue;
        const double ratio = t[i][rhs] / t[i][e];
        if (ratio < best - tol || (std::fabs(ratio - best) <= tol && r < m && basis[i] < basis[r])) {
          best = ratio;
          r = i;
        }
      }
      if (r == m) return false;
      pivot(r, e);
    }
    throw NumericError("simplex iteration limit reached");
  };

  LpSolution sol;
  std::vector<double> phase1(cols, 0.0);
  for (std::size_t j = n; j < cols; ++j) phase1[j] = 1.0;
  set_costs(phase1);
  run(cols);
  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::fabs(v));
  if (-d[rhs] > tol * scale * 10) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  // Drive remaining artificials out of the basis; rows that cannot pivot are redundant.
  std::vector<bool> redundant(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    std::size_t e = n;
    for (std::size_t j = 0; j < n; ++j)
      if (std::fabs(t[i][j]) > tol) {
        e = j;
        break;
      }
    if (e < n) pivot(i, e);
    else redundant[i] = true;
  }
  for (std::size_t i = 0; i < m; ++i)
    if (redundant[i]) std::fill(t[i].begin(), t[i].end(), 0.0);

  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  set_costs(phase2);
  if (!run(n)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  sol.status = LpStatus::Optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (!redundant[i] && basis[i] < n) sol.x[basis[i]] = std::max(0.0, t[i][rhs]);
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += c[j] * sol.x[j];
  return sol;
}

// Energy above the lower convex envelope of `refs` at the candidate's
// composition. Reference entries carrying the candidate's (non-empty) label
// are left out, as are entries containing elements foreign to the candidate.
inline HullResult energy_above_hull(const PhaseEntry& candidate, const std::vector<PhaseEntry>& refs,
                                    double lp_tol = 1e-9) {
  if (!std::isfinite(candidate.energy_per_atom)) throw DomainError("candidate energy is not finite");
  const auto& counts = candidate.composition.counts();
  std::vector<std::string> els;
  for (const auto& [e, n] : counts) els.push_back(e);

  std::vector<const PhaseEntry*> pool;
  std::set<std::string> seen, elemental;
  for (const auto& r : refs) {
    if (!candidate.label.empty() && r.label == candidate.label) continue;
    if (!std::isfinite(r.energy_per_atom)) throw DomainError("reference '" + r.label + "' has a non-finite energy");
    bool inside = true;
    for (const auto& [e, n] : r.composition.counts()) inside = inside && counts.count(e);
    if (!inside) continue;
    pool.push_back(&r);
    for (const auto& [e, n] : r.composition.counts()) seen.insert(e);
    if (r.composition.size() == 1) elemental.insert(r.composition.counts().begin()->first);
  }
  std::vector<std::string> missing;
  for (const auto& e : els)
    if (!seen.count(e)) missing.push_back(e);
  if (!missing.empty()) throw CoverageError(missing);

  std::vector<std::vector<double>> a(els.size(), std::vector<double>(pool.size()));
  std::vector<double> b(els.size()), c(pool.size());
  for (std::size_t k = 0; k < els.size(); ++k) {
    b[k] = candidate.composition.fraction(els[k]);
    for (std::size_t j = 0; j < pool.size(); ++j) a[k][j] = pool[j]->composition.fraction(els[k]);
  }
  for (std::size_t j = 0; j < pool.size(); ++j) c[j] = pool[j]->energy_per_atom;

  const LpSolution sol = solve_lp(a, b, c, lp_tol);
  if (sol.status != LpStatus::Optimal) {
    for (const auto& e : els)
      if (!elemental.count(e)) missing.push_back(e);
    if (missing.empty()) missing = els;
    throw CoverageError(missing);
  }
  HullResult out;
  out.hull_energy = sol.objective;
  out.e_hull = candidate.energy_per_atom - sol.objective;
  for (std::size_t j = 0; j < pool.size(); ++j)
    if (sol.x[j] > 1e-12) out.decomposition.emplace_back(*pool[j], sol.x[j]);
  return out;
}

inline bool is_stable(double e_hull) {
  if (!std::isfinite(e_hull)) throw DomainError("e_hull is not finite");
  return e_hull < kStabilityThreshold;
}

// Format: "label | formula | energy_per_atom" per line.
inline std::vector<PhaseEntry> parse_phases(std::string_view text) {
  std::vector<PhaseEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto p1 = body.find('|');
    const auto p2 = p1 == std::string_view::npos ? p1 : body.find('|', p1 + 1);
    if (p2 == std::string_view::npos) throw ConfigError("phase file line " + std::to_string(n) + ": expected 3 fields");
    PhaseEntry e{parse_formula(detail::trim(body.substr(p1 + 1, p2 - p1 - 1))), 0.0,
                 std::string(detail::trim(body.substr(0, p1)))};
    const std::string energy(detail::trim(body.substr(p2 + 1)));
    try {
      std::size_t used = 0;
      e.energy_per_atom = std::stod(energy, &used);
      if (used != energy.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw ConfigError("phase file line " + std::to_string(n) + ": bad energy '" + energy + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline const std::vector<PhaseEntry>& builtin_phases() {
  static const auto phases = parse_phases(data::reference_phases);
  return phases;
}

}  // namespace crystalign
