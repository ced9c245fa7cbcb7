#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "crystalign/energetics/backend.hpp"

namespace crystalign {

class RelaxationError : public Error {
 public:
  RelaxationError(const std::string& what, CrystalStructure last) : Error(what), last_(std::move(last)) {}
  const CrystalStructure& last_valid() const noexcept { return last_; }

 private:
  CrystalStructure last_;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

struct RelaxOptions {
  int max_steps = 200;
  double force_tol = 1e-3;          // eV/Angstrom, on the largest force component norm
  double initial_step = 0.01;       // Angstrom^2/eV
  double max_displacement = 0.2;    // Angstrom per step
  double explosion_force = 1e4;     // eV/Angstrom
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct RelaxResult {
  CrystalStructure structure;
  double energy_per_atom = 0.0;
  double max_force = 0.0;
  int steps = 0;
  bool converged = false;
};

namespace energetics_detail {

inline double max_norm(const std::vector<Vec3>& f) {
  double m = 0.0;
  for (const auto& v : f) m = std::max(m, norm(v));
  return m;
}

inline CrystalStructure displaced(const CrystalStructure& s, const std::vector<Vec3>& dir, double alpha) {
  const Mat3 inv = inverse(s.lattice().matrix());
  std::vector<Site> sites;
  sites.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3 df = row_times(alpha * dir[i], inv);
    sites.emplace_back(s.sites()[i].element, s.sites()[i].frac + df);
  }
  return CrystalStructure(s.lattice(), std::move(sites));
}

}  // namespace energetics_detail

// Steepest descent on atomic positions with a backtracking (Armijo) line
// search; the cell is held fixed. Each accepted step lowers the energy.
inline RelaxResult relax_positions(const EnergyBackend& backend, const CrystalStructure& start,
                                   const RelaxOptions& opt = {}) {
  namespace ed = energetics_detail;
  auto eval = [&](const CrystalStructure& s) {
    auto ef = backend.energy_and_forces(s);
    if (!ef) throw ConfigError("relaxation needs a backend with forces");
    return std::move(*ef);
  };
  CrystalStructure cur = start;
  EnergyForces ef;
  try {
    ef = eval(cur);
  } catch (const NumericError& e) {
    throw RelaxationError(e.what(), cur);
  }
  double fmax = ed::max_norm(ef.forces);
  if (!std::isfinite(ef.energy) || !(fmax < opt.explosion_force))
    throw RelaxationError("forces explode at the starting geometry", cur);

  double alpha = opt.initial_step;
  int step = 0;
  for (; step < opt.max_steps && fmax >= opt.force_tol; ++step) {
    if (opt.deadline && std::chrono::steady_clock::now() > *opt.deadline)
      throw TimeoutError("relaxation exceeded its deadline after " + std::to_string(step) + " steps");
    double g2 = 0.0;
    for (const auto& f : ef.forces) g2 += dot(f, f);
    if (alpha * fmax > opt.max_displacement) alpha = opt.max_displacement / fmax;
    bool accepted = false;
    while (alpha > 1e-14) {
      CrystalStructure trial = ed::displaced(cur, ef.forces, alpha);
      EnergyForces tf;
      try {
        tf = eval(trial);
      } catch (const NumericError&) {
        alpha *= 0.5;
        continue;
      }
      if (std::isfinite(tf.energy) && tf.energy <= ef.energy - 1e-4 * alpha * g2) {
        if (!(ed::max_norm(tf.forces) < opt.explosion_force))
          throw RelaxationError("forces exploded during relaxation", cur);
        cur = std::move(trial);
        ef = std::move(tf);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent left at machine precision
    fmax = ed::max_norm(ef.forces);
    alpha *= 1.5;
  }
  RelaxResult r{cur, ef.energy / static_cast<double>(cur.size()), fmax, step, fmax < opt.force_tol};
  return r;
}

inline CrystalStructure relax_positions(const EnergyBackend& backend, const CrystalStructure& start, int max_steps,
                                        double force_tol) {
  RelaxOptions opt;
  opt.max_steps = max_steps;
  opt.force_tol = force_tol;
  return relax_positions(backend, start, opt).structure;
}

}  // namespace crystalign
