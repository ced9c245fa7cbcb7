#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crystalign/ciflite/ciflite.hpp"
#include "crystalign/core/decimal.hpp"
#include "crystalign/energetics/hull.hpp"
#include "crystalign/structcore/niggli.hpp"
#include "crystalign/symmetry/detect.hpp"

namespace crystalign {

struct MatchConfig {
  double length_tol = 0.05;  // relative
  double angle_tol = 5.0;    // degrees
  double site_tol = 0.03;    // fractional

  void validate() const {
    if (!(length_tol > 0 && angle_tol > 0 && site_tol > 0)) throw ConfigError("matcher tolerances must be positive");
  }
};

// Precomputed, matcher-ready view of one structure.
struct MatchForm {
  std::string formula;
  std::string key;  // serialized form; fixes canonical order
  Vec3 lengths{}, angles{};
  std::vector<Vec3> frac;  // in the Niggli basis
  std::vector<std::string> elements;
  std::vector<IMat3> automorphisms;
};

inline MatchForm make_match_form(const CrystalStructure& s, const MatchConfig& cfg = {}) {
  MatchForm f;
  f.formula = reduced_formula(s.composition());
  f.key = write_ciflite(s);
  const NiggliResult nr = niggli_reduce_basis(s.lattice().matrix());
  const Lattice red = Lattice::from_vectors(nr.basis);
  f.lengths = red.lengths();
  f.angles = red.angles();
  const Mat3 tinv = to_real(inverse_unimodular(nr.transform));
  for (const auto& site : s.sites()) {
    f.frac.push_back(wrap01(row_times(site.frac, tinv)));
    f.elements.push_back(site.element);
  }
  const double shortest = std::min({f.lengths[0], f.lengths[1], f.lengths[2]});
  f.automorphisms = symmetry_detail::lattice_rotations(nr.basis, cfg.length_tol * shortest);
  return f;
}

namespace metrics_detail {

inline bool lattices_agree(const MatchForm& a, const MatchForm& b, const MatchConfig& cfg) {
  for (int k = 0; k < 3; ++k) {
    if (std::fabs(a.lengths[k] - b.lengths[k]) > cfg.length_tol * std::min(a.lengths[k], b.lengths[k])) return false;
    if (std::fabs(a.angles[k] - b.angles[k]) > cfg.angle_tol) return false;
  }
  return true;
}

// Greedy element-preserving assignment by increasing fractional distance.
inline bool sites_assign(const std::vector<Vec3>& fa, const MatchForm& a, const MatchForm& b, double tol) {
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    bool any = false;
    for (std::size_t j = 0; j < b.frac.size(); ++j) {
      if (a.elements[i] != b.elements[j]) continue;
      const double d = norm(wrap_centered(b.frac[j] - fa[i]));
      if (d <= tol) {
        pairs.push_back({d, i, j});
        any = true;
      }
    }
    if (!any) return false;
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return x.d != y.d ? x.d < y.d : (x.i != y.i ? x.i < y.i : x.j < y.j);
  });
  std::vector<char> ua(fa.size(), 0), ub(b.frac.size(), 0);
  std::size_t matched = 0;
  for (const auto& p : pairs) {
    if (ua[p.i] || ub[p.j]) continue;
    ua[p.i] = ub[p.j] = 1;
    ++matched;
  }
  return matched == fa.size();
}

inline bool directional_match(const MatchForm& a, const MatchForm& b, const MatchConfig& cfg) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : a.elements) ++counts[e];
  std::string rare = a.elements.front();
  for (const auto& [e, n] : counts)
    if (n < counts[rare]) rare = e;
  const std::size_t a0 = static_cast<std::size_t>(std::find(a.elements.begin(), a.elements.end(), rare) - a.elements.begin());
  std::vector<Vec3> fa(a.frac.size());
  for (const IMat3& w : a.automorphisms) {
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = w * a.frac[i];
    for (std::size_t j = 0; j < b.frac.size(); ++j) {
      if (b.elements[j] != rare) continue;
      const Vec3 t = b.frac[j] - fa[a0];
      std::vector<Vec3> moved(fa.size());
      for (std::size_t i = 0; i < fa.size(); ++i) moved[i] = fa[i] + t;
      if (sites_assign(moved, a, b, cfg.site_tol)) return true;
    }
  }
  return false;
}

}  // namespace metrics_detail

// Symmetric by construction: the pair is always examined in key order.
inline bool structures_match(const MatchForm& x, const MatchForm& y, const MatchConfig& cfg = {}) {
  if (x.formula != y.formula || x.frac.size() != y.frac.size()) return false;
  if (!metrics_detail::lattices_agree(x, y, cfg)) return false;
  const bool swap = y.key < x.key;
  return metrics_detail::directional_match(swap ? y : x, swap ? x : y, cfg);
}

inline bool structures_match(const CrystalStructure& a, const CrystalStructure& b, const MatchConfig& cfg = {}) {
  cfg.validate();
  return structures_match(make_match_form(a, cfg), make_match_form(b, cfg), cfg);
}

struct Clustering {
  std::vector<std::size_t> cluster_of;  // cluster id per input index
  std::vector<std::size_t> representative;  // input index per cluster id
  bool is_representative(std::size_t i) const { return representative[cluster_of[i]] == i; }
};

// Greedy clustering in canonical (serialized) order, so the result does not
// depend on input order. Optional group labels restrict matching to
// structures sharing a label.
inline Clustering cluster_forms(const std::vector<MatchForm>& forms, const MatchConfig& cfg = {},
                                const std::vector<std::string>* groups = nullptr) {
  if (groups && groups->size() != forms.size()) throw DomainError("group labels do not match the batch");
  std::vector<std::size_t> order(forms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (groups && (*groups)[x] != (*groups)[y]) return (*groups)[x] < (*groups)[y];
    return forms[x].key < forms[y].key;
  });
  Clustering c;
  c.cluster_of.assign(forms.size(), 0);
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> buckets;  // (group, formula) -> clusters
  for (std::size_t i : order) {
    auto& bucket = buckets[{groups ? (*groups)[i] : std::string(), forms[i].formula}];
    bool placed = false;
    for (std::size_t cid : bucket)
      if (structures_match(forms[c.representative[cid]], forms[i], cfg)) {
        c.cluster_of[i] = cid;
        placed = true;
        break;
      }
    if (!placed) {
      c.cluster_of[i] = c.representative.size();
      bucket.push_back(c.representative.size());
      c.representative.push_back(i);
    }
  }
  return c;
}

inline std::vector<MatchForm> make_match_forms(const std::vector<CrystalStructure>& batch, const MatchConfig& cfg = {}) {
  std::vector<MatchForm> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(make_match_form(s, cfg));
  return out;
}

inline double uniqueness(const std::vector<CrystalStructure>& batch, const MatchConfig& cfg = {}) {
  cfg.validate();
  if (batch.empty()) throw DomainError("uniqueness of an empty batch");
  const auto c = cluster_forms(make_match_forms(batch, cfg), cfg);
  return static_cast<double>(c.representative.size()) / static_cast<double>(batch.size());
}

// Reference structures bucketed by reduced formula.
class ReferenceIndex {
 public:
  ReferenceIndex() = default;
  ReferenceIndex(const std::vector<CrystalStructure>& refs, const MatchConfig& cfg = {}) : cfg_(cfg) {
    for (const auto& s : refs) add(s);
  }
  void add(const CrystalStructure& s) {
    auto f = make_match_form(s, cfg_);
    buckets_[f.formula].push_back(std::move(f));
    ++size_;
  }
  bool contains(const MatchForm& f) const {
    auto it = buckets_.find(f.formula);
    if (it == buckets_.end()) return false;
    for (const auto& r : it->second)
      if (structures_match(r, f, cfg_)) return true;
    return false;
  }
  std::size_t size() const noexcept { return size_; }
  const MatchConfig& config() const noexcept { return cfg_; }

 private:
  MatchConfig cfg_;
  std::map<std::string, std::vector<MatchForm>> buckets_;
  std::size_t size_ = 0;
};

inline std::vector<bool> novel_flags(const std::vector<MatchForm>& forms, const ReferenceIndex& refs) {
  std::vector<bool> out;
  out.reserve(forms.size());
  for (const auto& f : forms) out.push_back(!refs.contains(f));
  return out;
}

inline double novelty(const std::vector<CrystalStructure>& batch, const ReferenceIndex& refs) {
  if (batch.empty()) throw DomainError("novelty of an empty batch");
  const auto flags = novel_flags(make_match_forms(batch, refs.config()), refs);
  return static_cast<double>(std::count(flags.begin(), flags.end(), true)) / static_cast<double>(batch.size());
}

// Stable, first member of its cluster, and absent from the reference set.
inline std::vector<bool> sun_flags(const std::vector<MatchForm>& forms, const std::vector<std::optional<double>>& e_hulls,
                                   const ReferenceIndex& refs, const Clustering& clusters) {
  if (e_hulls.size() != forms.size()) throw DomainError("one e_hull per structure is required");
  const auto novel = novel_flags(forms, refs);
  std::vector<bool> out(forms.size());
  for (std::size_t i = 0; i < forms.size(); ++i)
    out[i] = e_hulls[i] && std::isfinite(*e_hulls[i]) && is_stable(*e_hulls[i]) && clusters.is_representative(i) &&
             novel[i];
  return out;
}

inline double sun_ratio(const std::vector<CrystalStructure>& batch, const std::vector<std::optional<double>>& e_hulls,
                        const ReferenceIndex& refs) {
  if (batch.empty()) throw DomainError("S.U.N. ratio of an empty batch");
  const auto forms = make_match_forms(batch, refs.config());
  const auto flags = sun_flags(forms, e_hulls, refs, cluster_forms(forms, refs.config()));
  return static_cast<double>(std::count(flags.begin(), flags.end(), true)) / static_cast<double>(batch.size());
}

struct Aggregate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
  bool low_count = false;  // n < 2, so no spread estimate
};

// Mean and standard error (sample std / sqrt(n)).
inline Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("aggregate of no values");
  Aggregate a;
  a.count = values.size();
  const double n = static_cast<double>(values.size());
  for (double v : values) a.mean += v;
  a.mean /= n;
  if (values.size() < 2) {
    a.low_count = true;
    return a;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  a.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return a;
}

// Proportion with standard error sqrt(p(1-p)/n).
inline Aggregate aggregate(const std::vector<bool>& flags) {
  if (flags.empty()) throw DomainError("aggregate of no values");
  Aggregate a;
  a.count = flags.size();
  const double n = static_cast<double>(flags.size());
  a.mean = static_cast<double>(std::count(flags.begin(), flags.end(), true)) / n;
  a.low_count = flags.size() < 2;
  if (!a.low_count) a.standard_error = std::sqrt(a.mean * (1.0 - a.mean) / n);
  return a;
}

struct MetricValue {
  std::string name;
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
  bool percent = true;  // rendered as a percentage in markdown
};

struct MetricReport {
  std::vector<MetricValue> metrics;

  const MetricValue* find(const std::string& name) const {
    for (const auto& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }

  std::string csv() const {
    std::string out = "metric,value,standard_error,count\n";
    for (const auto& m : metrics)
      out += m.name + "," + format_fixed(m.value, 6) + "," + format_fixed(m.standard_error, 6) + "," +
             std::to_string(m.count) + "\n";
    return out;
  }

  std::string markdown() const {
    std::string out = "| Metric | Value | Count |\n|---|---|---|\n";
    for (const auto& m : metrics) {
      const double k = m.percent ? 100.0 : 1.0;
      const std::string unit = m.percent ? "%" : "";
      out += "| " + m.name + " | " + format_fixed(k * m.value, m.percent ? 2 : 4) + unit + " ± " +
             format_fixed(k * m.standard_error, m.percent ? 2 : 4) + unit + " | " + std::to_string(m.count) + " |\n";
    }
    return out;
  }
};

}  // namespace crystalign
