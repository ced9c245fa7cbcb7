#pragma once

#include <cmath>

#include "crystalign/energetics/backend.hpp"

namespace crystalign {

inline constexpr double kEvPerCubicAngstromInGpa = 160.21766208;

// Bulk modulus (GPa) from B = V d2E/dV2 at the given geometry, by central
// differences on isotropic volume strain with fractional coordinates fixed.
inline double bulk_modulus(const EnergyBackend& backend, const CrystalStructure& s, double volume_strain = 1e-3) {
  if (!(volume_strain > 0 && volume_strain < 0.1)) throw DomainError("volume strain must lie in (0, 0.1)");
  const double n = static_cast<double>(s.size());
  const double v0 = s.volume();
  auto energy_at = [&](double strain) {
    const double f = std::cbrt(1.0 + strain);
    return backend.energy_per_atom(s.with_lattice(s.lattice().scaled(f))) * n;
  };
  const double ep = energy_at(volume_strain), e0 = energy_at(0.0), em = energy_at(-volume_strain);
  const double dv = v0 * volume_strain;
  const double b = v0 * (ep - 2.0 * e0 + em) / (dv * dv) * kEvPerCubicAngstromInGpa;
  if (!std::isfinite(b)) throw NumericError("bulk modulus is not finite");
  return b;
}

}  // namespace crystalign
