#pragma once

#include <cctype>
#include <map>
#include <numeric>
#include <string>
#include <string_view>

#include "crystalign/core/error.hpp"
#include "crystalign/structcore/elements.hpp"

namespace crystalign {

// Element -> atom count. Iteration order is alphabetical by symbol, which is
// also the canonical order of reduced formulas.
class Composition {
 public:
  Composition() = default;
  explicit Composition(std::map<std::string, int> counts) : counts_(std::move(counts)) {
    for (auto it = counts_.begin(); it != counts_.end();) {
      if (it->second < 0) throw DomainError("negative count for " + it->first);
      if (!is_element_symbol(it->first)) throw DomainError("unknown element " + it->first);
      it = it->second == 0 ? counts_.erase(it) : std::next(it);
    }
  }

  const std::map<std::string, int>& counts() const noexcept { return counts_; }
  bool empty() const noexcept { return counts_.empty(); }
  std::size_t size() const noexcept { return counts_.size(); }

  int count(const std::string& element) const {
    auto it = counts_.find(element);
    return it == counts_.end() ? 0 : it->second;
  }

  int total() const {
    int n = 0;
    for (const auto& [e, c] : counts_) n += c;
    return n;
  }

  int gcd() const {
    int g = 0;
    for (const auto& [e, c] : counts_) g = std::gcd(g, c);
    return g;
  }

  Composition reduced() const {
    const int g = gcd();
    if (g <= 1) return *this;
    std::map<std::string, int> r;
    for (const auto& [e, c] : counts_) r[e] = c / g;
    return Composition(std::move(r));
  }

  double fraction(const std::string& element) const {
    const int t = total();
    return t == 0 ? 0.0 : static_cast<double>(count(element)) / t;
  }

  Composition scaled(int factor) const {
    std::map<std::string, int> r;
    for (const auto& [e, c] : counts_) r[e] = c * factor;
    return Composition(std::move(r));
  }

  friend bool operator==(const Composition&, const Composition&) = default;

 private:
  std::map<std::string, int> counts_;
};

// Alphabetical element order, counts divided by their gcd, count 1 omitted.
inline std::string reduced_formula(const Composition& c) {
  std::string out;
  const Composition r = c.reduced();
  for (const auto& [e, n] : r.counts()) {
    out += e;
    if (n != 1) out += std::to_string(n);
  }
  return out;
}

namespace detail {

class FormulaReader {
 public:
  explicit FormulaReader(std::string_view s) : s_(s) {}

  std::map<std::string, int> read_all() {
    auto m = read_group();
    if (pos_ != s_.size()) fail("unexpected character");
    return m;
  }

 private:
  std::map<std::string, int> read_group() {
    std::map<std::string, int> out;
    while (pos_ < s_.size() && s_[pos_] != ')') {
      std::map<std::string, int> part;
      if (s_[pos_] == '(') {
        ++pos_;
        part = read_group();
        if (pos_ >= s_.size() || s_[pos_] != ')') fail("unbalanced parenthesis");
        ++pos_;
      } else if (std::isupper(static_cast<unsigned char>(s_[pos_]))) {
        std::string sym(1, s_[pos_++]);
        while (pos_ < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_]))) sym += s_[pos_++];
        if (!is_element_symbol(sym)) fail("unknown element '" + sym + "'");
        part[sym] = 1;
      } else {
        fail("unexpected character");
      }
      const int mult = read_int();
      for (const auto& [e, c] : part) out[e] += c * mult;
    }
    return out;
  }

  int read_int() {
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) return 1;
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      if (v > 1'000'000) fail("count too large");
    }
    if (v == 0) fail("zero count");
    return static_cast<int>(v);
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError(ParseErrorKind::BadValue, 1, pos_ + 1,
                     "formula '" + std::string(s_) + "': " + why);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses formulas such as "CaCO3", "Na2Cl2" or "Ca3(PO4)2".
inline Composition parse_formula(std::string_view text) {
  if (text.empty()) throw ParseError(ParseErrorKind::BadValue, 1, 1, "empty formula");
  return Composition(detail::FormulaReader(text).read_all());
}

}  // namespace crystalign
