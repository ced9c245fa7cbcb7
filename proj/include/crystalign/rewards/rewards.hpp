#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crystalign/ciflite/prompt.hpp"
#include "crystalign/core/error.hpp"
#include "crystalign/validity/checks.hpp"

namespace crystalign {

struct RewardWeights {
  double alpha_validity = 1.0;
  double alpha_stability = 10.0;
  double beta_property = 1.0;

  void validate() const {
    for (double w : {alpha_validity, alpha_stability, beta_property})
      if (!(std::isfinite(w) && w >= 0)) throw ConfigError("reward weights must be finite and non-negative");
  }
};

struct RewardBreakdown {
  int r_structural = 0;
  int r_chemical = 0;
  int r_instruction = 0;
  int validity_gate = 0;
  std::optional<double> r_stability;  // set only when the gate is open
  std::map<std::string, double> r_range;
  double r_property = 0.0;
  double r_target = 0.0;
  std::vector<std::string> anomalies;

  int r_validity() const { return r_structural + r_chemical + r_instruction; }
};

// Bounded in (0, 1]; negative e_hull is clamped to 0.
inline double stability_reward(double e_hull, double e0 = 1.0) {
  if (!std::isfinite(e_hull)) throw DomainError("e_hull is not finite");
  if (!(e0 > 0) || !std::isfinite(e0)) throw DomainError("e0 must be positive");
  const double e = e_hull < 0 ? 0.0 : e_hull;
  return e <= e0 ? 1.0 - e / (2.0 * e0) : e0 / (2.0 * e);
}

// 1 - 2z^2 inside |z| <= 1/sqrt(2), exp(1 - 2z^2) - 1 beyond, with z the
// offset from the interval midpoint in units of its width.
inline double range_reward(double p, const Interval& iv) {
  if (!(iv.low < iv.high)) throw DomainError("range reward needs L < R");
  if (!std::isfinite(p)) throw DomainError("property value is not finite");
  const double z = (p - 0.5 * (iv.low + iv.high)) / (iv.high - iv.low);
  const double q = 2.0 * z * z;
  return q <= 1.0 ? 1.0 - q : std::exp(1.0 - q) - 1.0;
}

inline int validity_reward(const ValidityReport& r) {
  if (!r.parsed) return 0;
  return int(r.structural) + int(r.chemical) + int(r.composition_match);
}

inline bool validity_gate(const ValidityReport& r) {
  return r.parsed && r.structural && r.chemical && r.composition_match;
}

namespace rewards_detail {

inline RewardBreakdown gated_components(const ValidityReport& report, std::optional<double> e_hull, double e0) {
  RewardBreakdown b;
  b.r_structural = report.parsed && report.structural;
  b.r_chemical = report.parsed && report.chemical;
  b.r_instruction = report.parsed && report.composition_match;
  b.validity_gate = validity_gate(report);
  if (b.validity_gate) {
    if (e_hull && std::isfinite(*e_hull)) {
      b.r_stability = stability_reward(*e_hull, e0);
    } else {
      b.validity_gate = 0;
      b.anomalies.emplace_back(e_hull ? "non-finite e_hull with an open validity gate"
                                      : "missing e_hull with an open validity gate");
    }
  }
  return b;
}

}  // namespace rewards_detail

// alpha_validity * R_validity + alpha_stability * gate * R_stability.
inline RewardBreakdown combined_reward(const ValidityReport& report, std::optional<double> e_hull,
                                       const RewardWeights& w = {}, double e0 = 1.0) {
  w.validate();
  RewardBreakdown b = rewards_detail::gated_components(report, e_hull, e0);
  b.r_target = w.alpha_validity * b.r_validity();
  if (b.validity_gate) b.r_target += w.alpha_stability * *b.r_stability;
  return b;
}

inline constexpr const char* kSpacegroupKey = "spacegroup";

// Measured property values by key; nullopt marks a failed measurement.
// The discrete space-group key carries the detected group number.
using PropertyMeasurements = std::map<std::string, std::optional<double>>;

struct PropertyScore {
  double total = 0.0;
  std::map<std::string, double> per_key;
  std::vector<std::string> failures;
};

inline PropertyScore score_properties(const PromptConstraints& spec, const PropertyMeasurements& measured,
                                      bool spacegroup_indicator = true) {
  PropertyScore s;
  auto lookup = [&](const std::string& key) -> std::optional<double> {
    auto it = measured.find(key);
    if (it == measured.end()) throw DomainError("no measurement or failure marker for property '" + key + "'");
    if (it->second && !std::isfinite(*it->second)) return std::nullopt;
    return it->second;
  };
  for (const auto& [key, iv] : spec.property_ranges) {
    const auto v = lookup(key);
    double r = -1.0;
    if (v) r = range_reward(*v, iv);
    else s.failures.push_back(key);
    s.per_key[key] = r;
    s.total += r;
  }
  if (spacegroup_indicator && spec.spacegroup_number) {
    const auto v = lookup(kSpacegroupKey);
    if (!v) s.failures.emplace_back(kSpacegroupKey);
    const double r = v && static_cast<int>(std::lround(*v)) == *spec.spacegroup_number ? 1.0 : 0.0;
    s.per_key[kSpacegroupKey] = r;
    s.total += r;
  }
  return s;
}

inline double property_reward(const PromptConstraints& spec, const PropertyMeasurements& measured,
                              bool spacegroup_indicator = true) {
  return score_properties(spec, measured, spacegroup_indicator).total;
}

// gate * R_stability + beta * R_property; only stability is gated.
inline RewardBreakdown conditioned_breakdown(const ValidityReport& report, std::optional<double> e_hull,
                                             const PromptConstraints& spec, const PropertyMeasurements& measured,
                                             const RewardWeights& w = {}, double e0 = 1.0,
                                             bool spacegroup_indicator = true) {
  w.validate();
  RewardBreakdown b = rewards_detail::gated_components(report, e_hull, e0);
  const PropertyScore ps = score_properties(spec, measured, spacegroup_indicator);
  b.r_range = ps.per_key;
  b.r_property = ps.total;
  for (const auto& k : ps.failures) b.anomalies.push_back("property measurement failed: " + k);
  b.r_target = (b.validity_gate ? *b.r_stability : 0.0) + w.beta_property * b.r_property;
  return b;
}

inline double conditioned_reward(const ValidityReport& report, std::optional<double> e_hull,
                                 const PromptConstraints& spec, const PropertyMeasurements& measured,
                                 const RewardWeights& w = {}, double e0 = 1.0) {
  return conditioned_breakdown(report, e_hull, spec, measured, w, e0).r_target;
}

}  // namespace crystalign
