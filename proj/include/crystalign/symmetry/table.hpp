#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/data/spacegroups.hpp"
#include "crystalign/symmetry/signature.hpp"

namespace crystalign {

struct SpacegroupEntry {
  int number = 0;
  std::string symbol;
  std::vector<SymmetryOp> generators;
};

// Closes a generator set whose translations are multiples of 1/24.
// Returns every operation with translation in [0,1).
inline std::vector<SymmetryOp> close_exact(const std::vector<SymmetryOp>& gens, std::size_t cap = 1024) {
  struct Key {
    IMat3 r;
    IVec3 t;
    bool operator<(const Key& o) const { return std::tie(r, t) < std::tie(o.r, o.t); }
  };
  auto key_of = [](const SymmetryOp& op) {
    Key k{op.rotation, {}};
    for (int i = 0; i < 3; ++i) {
      const long q = std::lround(op.translation[i] * 24.0);
      k.t[i] = static_cast<int>(((q % 24) + 24) % 24);
    }
    return k;
  };
  auto op_of = [](const Key& k) {
    return SymmetryOp{k.r, {k.t[0] / 24.0, k.t[1] / 24.0, k.t[2] / 24.0}};
  };
  std::map<Key, bool> seen;
  std::vector<SymmetryOp> group{SymmetryOp{}};
  seen[key_of(group[0])] = true;
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const auto& g : gens) {
      const Key k = key_of(compose(group[i], g));
      if (seen.emplace(k, true).second) {
        group.push_back(op_of(k));
        if (group.size() > cap) throw ConfigError("generator set does not close to a space group");
      }
    }
  }
  return group;
}

// Splits a closed operation list into centering vectors and one
// representative per distinct rotation.
inline void split_centering(const std::vector<SymmetryOp>& ops, std::vector<SymmetryOp>& reps,
                            std::vector<Vec3>& centering, double tol) {
  reps.clear();
  centering.clear();
  for (const auto& op : ops) {
    if (op.rotation == iidentity3() && translation_distance(op.translation, {0, 0, 0}) > tol)
      centering.push_back(op.translation);
    bool have = false;
    for (const auto& r : reps)
      if (r.rotation == op.rotation) have = true;
    if (!have) reps.push_back(op);
  }
}

class SpacegroupTable {
 public:
  static SpacegroupTable parse(std::string_view text) {
    SpacegroupTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number_line = 0;
    while (std::getline(in, line)) {
      ++number_line;
      const auto body = detail::trim(line);
      if (body.empty() || body[0] == '#') continue;
      const auto p1 = body.find('|');
      const auto p2 = body.find('|', p1 == std::string_view::npos ? 0 : p1 + 1);
      if (p1 == std::string_view::npos || p2 == std::string_view::npos)
        throw ConfigError("space-group table line " + std::to_string(number_line) + ": expected 3 fields");
      SpacegroupEntry e;
      e.number = std::stoi(std::string(detail::trim(body.substr(0, p1))));
      e.symbol = std::string(detail::trim(body.substr(p1 + 1, p2 - p1 - 1)));
      std::string_view gens = body.substr(p2 + 1);
      while (!gens.empty()) {
        const auto semi = gens.find(';');
        const auto g = detail::trim(gens.substr(0, semi));
        if (!g.empty()) e.generators.push_back(parse_triplet(g));
        if (semi == std::string_view::npos) break;
        gens = gens.substr(semi + 1);
      }
      t.add(std::move(e));
    }
    return t;
  }

  static const SpacegroupTable& builtin() {
    static const SpacegroupTable table = parse(data::spacegroups);
    return table;
  }

  const SpacegroupEntry& entry(int number) const {
    auto it = index_.find(number);
    if (it == index_.end()) throw DomainError("space-group number " + std::to_string(number) + " not in table");
    return entries_[it->second];
  }
  const std::vector<SpacegroupEntry>& entries() const noexcept { return entries_; }
  const std::string& signature(int number) const { return signatures_.at(index_.at(number)).key; }

  // Numbers whose fingerprint equals `key`.
  std::vector<int> lookup(const std::string& key) const {
    auto it = by_key_.find(key);
    return it == by_key_.end() ? std::vector<int>{} : it->second;
  }
  // Numbers sharing the per-operation descriptors (a coarser match).
  std::vector<int> lookup_coarse(const std::string& coarse) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (signatures_[i].coarse == coarse) out.push_back(entries_[i].number);
    return out;
  }
  std::vector<int> lookup_point_group(const std::string& pg) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (signatures_[i].point_group == pg) out.push_back(entries_[i].number);
    return out;
  }
  std::size_t point_group_order(int number) const {
    const auto& pg = signatures_.at(index_.at(number)).point_group;
    return static_cast<std::size_t>(std::count(pg.begin(), pg.end(), ';'));
  }

 private:
  std::vector<SpacegroupEntry> entries_;
  std::vector<GroupSignature> signatures_;
  std::map<int, std::size_t> index_;
  std::map<std::string, std::vector<int>> by_key_;

  void add(SpacegroupEntry e) {
    if (e.number < 1 || e.number > 230) throw ConfigError("space-group number out of range");
    const auto ops = close_exact(e.generators);
    std::vector<SymmetryOp> reps, prim;
    std::vector<Vec3> centering;
    split_centering(ops, reps, centering, 1e-9);
    PrimitiveBasis basis;
    if (!to_primitive_reps(reps, centering, prim, basis, 1e-9))
      throw ConfigError("space group " + std::to_string(e.number) + ": inconsistent centering");
    auto sig = group_signature(prim, 1e-6);
    by_key_[sig.key].push_back(e.number);
    index_[e.number] = entries_.size();
    signatures_.push_back(std::move(sig));
    entries_.push_back(std::move(e));
  }
};

}  // namespace crystalign
