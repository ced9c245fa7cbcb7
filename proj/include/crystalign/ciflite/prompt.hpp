#pragma once

// Instruction grammar. Each constraint is one optional templated sentence:
//
//   The chemical formula is CaCO3.
//   The formation energy per atom is -2.6875.
//   The space-group number is 167.
//   The energy above the convex hull is 0.0.
//   The band gap is 4.9995.
//   The bulk modulus is between 100 and 150.
//
// Sentences outside the templates are ignored.

#include <charconv>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/structcore/composition.hpp"

namespace crystalign {

struct Interval {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct PromptConstraints {
  std::optional<Composition> formula;
  std::string formula_text;  // as written in the prompt, e.g. "CaCO3"
  std::optional<int> spacegroup_number;
  std::optional<double> formation_energy_per_atom;
  std::optional<double> e_hull_target;
  std::optional<double> band_gap;
  std::map<std::string, Interval> property_ranges;

  bool empty() const {
    return !formula && !spacegroup_number && !formation_energy_per_atom && !e_hull_target && !band_gap &&
           property_ranges.empty();
  }
};

namespace detail {

// A sentence starts at the beginning of the text or after ". " / newline and
// ends at a period followed by whitespace or end of text.
inline std::size_t sentence_end(std::string_view text, std::size_t from) {
  for (std::size_t i = from; i < text.size(); ++i) {
    if (text[i] == '\n') return i;
    if (text[i] == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))))
      return i;
  }
  return text.size();
}

inline bool at_sentence_start(std::string_view text, std::size_t pos) {
  if (pos == 0) return true;
  std::size_t i = pos;
  while (i > 0 && (text[i - 1] == ' ' || text[i - 1] == '\t')) --i;
  return i == 0 || text[i - 1] == '.' || text[i - 1] == '\n' || text[i - 1] == ':';
}

inline double prompt_number(std::string_view text, std::size_t offset, std::string_view tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (tok.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    auto [line, col] = line_col(text, offset);
    throw ParseError(ParseErrorKind::BadNumber, line, col, "malformed number '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

inline PromptConstraints parse_prompt(std::string_view text) {
  PromptConstraints pc;

  // Calls fn(value_text, value_offset) for every sentence beginning with `prefix`.
  auto each = [&](std::string_view prefix, auto&& fn) {
    for (std::size_t p = text.find(prefix); p != std::string_view::npos; p = text.find(prefix, p + 1)) {
      if (!detail::at_sentence_start(text, p)) continue;
      const std::size_t vstart = p + prefix.size();
      const std::size_t vend = detail::sentence_end(text, vstart);
      const std::string_view raw = text.substr(vstart, vend - vstart);
      std::size_t off = vstart;
      while (off < vend && std::isspace(static_cast<unsigned char>(text[off]))) ++off;
      fn(detail::trim(raw), off);
    }
  };

  each("The chemical formula is ", [&](std::string_view v, std::size_t off) {
    try {
      pc.formula = parse_formula(v);
    } catch (const ParseError& e) {
      auto [line, col] = detail::line_col(text, off);
      throw ParseError(ParseErrorKind::BadValue, line, col, e.what());
    }
    pc.formula_text = std::string(v);
  });
  each("The formation energy per atom is ", [&](std::string_view v, std::size_t off) {
    pc.formation_energy_per_atom = detail::prompt_number(text, off, v);
  });
  each("The space-group number is ", [&](std::string_view v, std::size_t off) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    auto [line, col] = detail::line_col(text, off);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
      throw ParseError(ParseErrorKind::BadNumber, line, col, "malformed space-group number '" + std::string(v) + "'");
    if (n < 1 || n > 230)
      throw ParseError(ParseErrorKind::BadValue, line, col, "space-group number " + std::to_string(n) + " outside [1, 230]");
    pc.spacegroup_number = n;
  });
  each("The energy above the convex hull is ", [&](std::string_view v, std::size_t off) {
    pc.e_hull_target = detail::prompt_number(text, off, v);
  });
  each("The band gap is ", [&](std::string_view v, std::size_t off) {
    pc.band_gap = detail::prompt_number(text, off, v);
  });

  // "The <property> is between L and R."
  constexpr std::string_view kBetween = " is between ";
  for (std::size_t p = text.find(kBetween); p != std::string_view::npos; p = text.find(kBetween, p + 1)) {
    // Walk back to "The " at a sentence start.
    const std::size_t the = text.rfind("The ", p);
    if (the == std::string_view::npos || !detail::at_sentence_start(text, the)) continue;
    const std::string_view name = text.substr(the + 4, p - the - 4);
    if (name.empty() || name.find('.') != std::string_view::npos || name.find('\n') != std::string_view::npos)
      continue;
    const std::size_t vstart = p + kBetween.size();
    const std::size_t vend = detail::sentence_end(text, vstart);
    const std::string_view body = text.substr(vstart, vend - vstart);
    const std::size_t and_pos = body.find(" and ");
    auto [line, col] = detail::line_col(text, vstart);
    if (and_pos == std::string_view::npos)
      throw ParseError(ParseErrorKind::BadValue, line, col, "range sentence lacks 'and'");
    const double lo = detail::prompt_number(text, vstart, detail::trim(body.substr(0, and_pos)));
    const double hi = detail::prompt_number(text, vstart + and_pos + 5, detail::trim(body.substr(and_pos + 5)));
    if (lo > hi) throw ParseError(ParseErrorKind::BadValue, line, col, "range lower bound exceeds upper bound");
    std::string key;
    for (char c : name) key += c == ' ' || c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    pc.property_ranges[key] = Interval{lo, hi};
  }
  return pc;
}

}  // namespace crystalign
