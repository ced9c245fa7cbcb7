#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/data/oxidation_states.hpp"
#include "crystalign/structcore/composition.hpp"
#include "crystalign/structcore/elements.hpp"

namespace crystalign {

// Allowed integer oxidation states per element.
class OxidationTable {
 public:
  OxidationTable() = default;
  explicit OxidationTable(std::map<std::string, std::vector<int>> states) : states_(std::move(states)) {}

  // Format: one "El: s1,s2,..." line per element; '#' starts a comment.
  static OxidationTable parse(std::string_view text) {
    std::map<std::string, std::vector<int>> states;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      auto body = detail::trim(line);
      if (body.empty() || body[0] == '#') continue;
      const auto colon = body.find(':');
      if (colon == std::string_view::npos)
        throw ConfigError("oxidation table line " + std::to_string(number) + ": missing ':'");
      const std::string el(detail::trim(body.substr(0, colon)));
      if (!is_element_symbol(el))
        throw ConfigError("oxidation table line " + std::to_string(number) + ": unknown element '" + el + "'");
      std::vector<int> list;
      std::string_view rest = detail::trim(body.substr(colon + 1));
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        auto tok = detail::trim(rest.substr(0, comma));
        if (!tok.empty() && tok[0] == '+') tok.remove_prefix(1);
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
          throw ConfigError("oxidation table line " + std::to_string(number) + ": bad state '" + std::string(tok) + "'");
        list.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      if (!states.emplace(el, std::move(list)).second)
        throw ConfigError("oxidation table line " + std::to_string(number) + ": duplicate element '" + el + "'");
    }
    return OxidationTable(std::move(states));
  }

  static const OxidationTable& builtin() {
    static const OxidationTable table = parse(data::oxidation_states);
    return table;
  }

  bool contains(const std::string& el) const { return states_.count(el) != 0; }
  const std::vector<int>& states(const std::string& el) const {
    auto it = states_.find(el);
    if (it == states_.end()) throw ConfigError("element '" + el + "' missing from oxidation table");
    return it->second;
  }
  const std::map<std::string, std::vector<int>>& all() const noexcept { return states_; }

 private:
  std::map<std::string, std::vector<int>> states_;
};

struct ChemicalOptions {
  bool pauling_screen = false;       // cations must be less electronegative than anions
  bool single_element_valid = true;  // elemental cells count as neutral
  bool metal_alloys_valid = false;   // all-metal compositions count as neutral
  std::uint64_t enumeration_cap = 10'000'000;
};

using OxidationAssignment = std::map<std::string, int>;

namespace validity_detail {

inline bool pauling_ok(const std::vector<std::string>& els, const std::vector<int>& states) {
  double max_cation = -1e9, min_anion = 1e9;
  for (std::size_t i = 0; i < els.size(); ++i) {
    const auto info = find_element(els[i]);
    if (!info || info->pauling_electronegativity <= 0) continue;  // unknown electronegativity: no constraint
    if (states[i] > 0) max_cation = std::max(max_cation, info->pauling_electronegativity);
    if (states[i] < 0) min_anion = std::min(min_anion, info->pauling_electronegativity);
  }
  return max_cation < min_anion;
}

}  // namespace validity_detail

// A charge-neutral choice of one allowed state per element over the reduced
// composition. Exhaustive product enumeration visits assignments in
// lexicographic order (elements alphabetical, states in table order), so the
// first hit is returned; above the cap a meet-in-the-middle search is used.
inline std::optional<OxidationAssignment> find_oxidation_assignment(const Composition& c, const OxidationTable& table,
                                                                    const ChemicalOptions& opt = {}) {
  if (c.empty()) throw DomainError("empty composition");
  const Composition r = c.reduced();
  std::vector<std::string> els;
  std::vector<long> counts;
  std::vector<const std::vector<int>*> lists;
  for (const auto& [e, n] : r.counts()) {
    els.push_back(e);
    counts.push_back(n);
    lists.push_back(&table.states(e));
  }
  if (els.size() == 1 && opt.single_element_valid) return OxidationAssignment{{els[0], 0}};
  if (opt.metal_alloys_valid) {
    bool all_metal = true;
    for (const auto& e : els) {
      const auto info = find_element(e);
      all_metal = all_metal && info && info->metal;
    }
    if (all_metal) {
      OxidationAssignment a;
      for (const auto& e : els) a[e] = 0;
      return a;
    }
  }
  for (const auto* l : lists)
    if (l->empty()) return std::nullopt;

  const std::size_t k = els.size();
  auto make = [&](const std::vector<int>& st) {
    OxidationAssignment a;
    for (std::size_t i = 0; i < k; ++i) a[els[i]] = st[i];
    return a;
  };

  std::uint64_t total = 1;
  bool over = false;
  for (const auto* l : lists) {
    if (total > opt.enumeration_cap / l->size() + 1) over = true;
    total *= l->size();
  }
  if (!over && total <= opt.enumeration_cap) {
    std::vector<std::size_t> idx(k, 0);
    std::vector<int> st(k);
    for (;;) {
      long sum = 0;
      for (std::size_t i = 0; i < k; ++i) {
        st[i] = (*lists[i])[idx[i]];
        sum += counts[i] * st[i];
      }
      if (sum == 0 && (!opt.pauling_screen || validity_detail::pauling_ok(els, st))) return make(st);
      std::size_t i = k;
      while (i > 0) {
        --i;
        if (++idx[i] < lists[i]->size()) break;
        idx[i] = 0;
        if (i == 0) return std::nullopt;
      }
    }
  }

  // Meet in the middle: sums of the first half indexed, second half probed.
  const std::size_t h = k / 2;
  auto enumerate = [&](std::size_t lo, std::size_t hi, auto&& fn) {
    std::vector<std::size_t> idx(hi - lo, 0);
    std::vector<int> st(hi - lo);
    for (;;) {
      long sum = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        st[i - lo] = (*lists[i])[idx[i - lo]];
        sum += counts[i] * st[i - lo];
      }
      if (!fn(sum, st)) return;
      std::size_t i = hi - lo;
      for (;;) {
        if (i == 0) return;
        --i;
        if (++idx[i] < lists[lo + i]->size()) break;
        idx[i] = 0;
        if (i == 0) return;
      }
    }
  };
  std::unordered_map<long, std::vector<std::vector<int>>> left;
  enumerate(0, h, [&](long sum, const std::vector<int>& st) {
    auto& bucket = left[sum];
    if (!opt.pauling_screen && !bucket.empty()) return true;
    bucket.push_back(st);
    return true;
  });
  std::optional<OxidationAssignment> found;
  enumerate(h, k, [&](long sum, const std::vector<int>& st) {
    auto it = left.find(-sum);
    if (it == left.end()) return true;
    for (const auto& a : it->second) {
      std::vector<int> full = a;
      full.insert(full.end(), st.begin(), st.end());
      if (!opt.pauling_screen || validity_detail::pauling_ok(els, full)) {
        found = make(full);
        return false;
      }
    }
    return true;
  });
  return found;
}

inline bool check_chemical(const Composition& c, const OxidationTable& table = OxidationTable::builtin(),
                           const ChemicalOptions& opt = {}) {
  return find_oxidation_assignment(c, table, opt).has_value();
}

}  // namespace crystalign
