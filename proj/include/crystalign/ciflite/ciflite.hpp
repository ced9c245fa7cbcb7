#pragma once

// CIF-lite: the compact structure block emitted at the end of a response.
//
//   <CIF>P1
//   a b c
//   alpha beta gamma
//   El 1 x y z
//   ...</CIF>
//
// The writer is bit-exact: lengths with 6 decimals, angles with 4,
// fractional coordinates with 8, all rounded half away from zero.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crystalign/core/decimal.hpp"
#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/structcore/structure.hpp"

namespace crystalign {

inline constexpr std::string_view kCifOpen = "<CIF>";
inline constexpr std::string_view kCifClose = "</CIF>";
inline constexpr int kLengthDecimals = 6;
inline constexpr int kAngleDecimals = 4;
inline constexpr int kCoordDecimals = 8;

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> split_ws(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline double parse_real(const Token& t, std::size_t line, std::size_t col_offset) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError(ParseErrorKind::BadNumber, line, col_offset + t.column,
                     "'" + std::string(t.text) + "' is not a finite number");
  return v;
}

inline std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> out;
  for (std::size_t p = text.find(needle); p != std::string_view::npos; p = text.find(needle, p + 1))
    out.push_back(p);
  return out;
}

}  // namespace detail

// Parse the single <CIF>...</CIF> span contained in `text`. Surrounding text
// is ignored. Line numbers in errors refer to lines of `text`.
inline CrystalStructure parse_ciflite(std::string_view text) {
  const auto opens = detail::find_all(text, kCifOpen);
  const auto closes = detail::find_all(text, kCifClose);
  if (opens.empty()) throw ParseError(ParseErrorKind::MissingMarker, 0, 0, "no <CIF> marker");
  if (opens.size() > 1) throw MultipleBlocksError(opens);
  if (closes.empty() || closes.front() < opens.front()) {
    auto [l, c] = detail::line_col(text, opens.front());
    throw ParseError(ParseErrorKind::MissingMarker, l, c, "<CIF> block is not closed by </CIF>");
  }
  if (closes.size() > 1) {
    auto [l, c] = detail::line_col(text, closes[1]);
    throw ParseError(ParseErrorKind::MissingMarker, l, c, "unmatched </CIF> marker");
  }

  const std::size_t body_begin = opens.front() + kCifOpen.size();
  const std::string_view body = text.substr(body_begin, closes.front() - body_begin);
  const auto [first_line, first_col] = detail::line_col(text, body_begin);

  // Non-blank lines of the body with their absolute line numbers and the
  // column offset of their first byte.
  struct Line {
    std::string_view text;
    std::size_t number;
    std::size_t col_offset;
  };
  std::vector<Line> lines;
  {
    std::size_t start = 0, number = first_line;
    for (;;) {
      const std::size_t nl = body.find('\n', start);
      const std::string_view l = body.substr(start, nl == std::string_view::npos ? nl : nl - start);
      const std::size_t col_offset = number == first_line ? first_col - 1 : 0;
      if (!detail::split_ws(l).empty()) lines.push_back({l, number, col_offset});
      if (nl == std::string_view::npos) break;
      start = nl + 1;
      ++number;
    }
  }
  if (lines.empty()) throw ParseError(ParseErrorKind::FieldArity, first_line, first_col, "empty <CIF> block");

  auto header = detail::split_ws(lines[0].text);
  if (header.size() != 1 || header[0].text != "P1")
    throw ParseError(ParseErrorKind::FieldArity, lines[0].number, lines[0].col_offset + 1,
                     "expected 'P1' after <CIF>");
  if (lines.size() < 4) {
    const auto& last = lines.back();
    throw ParseError(ParseErrorKind::FieldArity, last.number, 1,
                     "block needs lattice lengths, angles and at least one site");
  }

  auto read_triple = [&](const Line& l, const char* what) {
    auto toks = detail::split_ws(l.text);
    if (toks.size() != 3)
      throw ParseError(ParseErrorKind::FieldArity, l.number, l.col_offset + 1,
                       std::string("expected 3 ") + what + ", found " + std::to_string(toks.size()));
    return Vec3{detail::parse_real(toks[0], l.number, l.col_offset),
                detail::parse_real(toks[1], l.number, l.col_offset),
                detail::parse_real(toks[2], l.number, l.col_offset)};
  };
  const Vec3 lengths = read_triple(lines[1], "lattice lengths");
  const Vec3 angles = read_triple(lines[2], "lattice angles");

  std::optional<Lattice> lattice;
  try {
    lattice.emplace(lengths, angles);
  } catch (const GeometryError& e) {
    throw ParseError(ParseErrorKind::BadGeometry, lines[1].number, 1, e.what());
  }

  std::vector<Site> sites;
  sites.reserve(lines.size() - 3);
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const auto& l = lines[i];
    auto toks = detail::split_ws(l.text);
    if (toks.size() != 5)
      throw ParseError(ParseErrorKind::FieldArity, l.number, l.col_offset + 1,
                       "site line needs 'Element count x y z', found " + std::to_string(toks.size()) + " fields");
    const std::string element(toks[0].text);
    if (!is_element_symbol(element))
      throw ParseError(ParseErrorKind::UnknownElement, l.number, l.col_offset + toks[0].column,
                       "unknown element symbol '" + element + "'");
    int count = 0;
    {
      const auto& t = toks[1];
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), count);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size() || count != 1)
        throw ParseError(ParseErrorKind::BadCount, l.number, l.col_offset + t.column,
                         "site count must be the integer 1, found '" + std::string(t.text) + "'");
    }
    const Vec3 f{detail::parse_real(toks[2], l.number, l.col_offset),
                 detail::parse_real(toks[3], l.number, l.col_offset),
                 detail::parse_real(toks[4], l.number, l.col_offset)};
    sites.emplace_back(element, f);
  }
  return CrystalStructure(*lattice, std::move(sites));
}

// Fixed-precision coordinate text; a value that rounds up to 1 is written as
// 0 so that the output re-parses to the same wrapped coordinate.
inline std::string format_coordinate(double x) {
  std::string s = format_fixed(wrap01(x), kCoordDecimals);
  if (s == "1.00000000") s = "0.00000000";
  return s;
}

inline std::string write_ciflite(const CrystalStructure& s) {
  std::string out;
  out.reserve(64 + 48 * s.size());
  out += kCifOpen;
  out += "P1\n";
  const auto& l = s.lattice().lengths();
  const auto& a = s.lattice().angles();
  out += format_fixed(l[0], kLengthDecimals) + ' ' + format_fixed(l[1], kLengthDecimals) + ' ' +
         format_fixed(l[2], kLengthDecimals) + '\n';
  out += format_fixed(a[0], kAngleDecimals) + ' ' + format_fixed(a[1], kAngleDecimals) + ' ' +
         format_fixed(a[2], kAngleDecimals) + '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& site = s.sites()[i];
    out += site.element;
    out += " 1 ";
    out += format_coordinate(site.frac[0]) + ' ' + format_coordinate(site.frac[1]) + ' ' +
           format_coordinate(site.frac[2]);
    if (i + 1 < s.size()) out += '\n';
  }
  out += kCifClose;
  return out;
}

struct ResponseParts {
  std::optional<std::string> trace_text;
  std::optional<std::string> cif_text;
};

// Split a model response into the reasoning text before "<CIF>" and the
// marker-delimited block. A response with no block is all trace.
inline ResponseParts extract_response_parts(std::string_view text) {
  const auto opens = detail::find_all(text, kCifOpen);
  if (opens.size() > 1) throw MultipleBlocksError(opens);
  ResponseParts parts;
  auto non_blank = [](std::string_view v) { return v.find_first_not_of(" \t\r\n") != std::string_view::npos; };
  if (opens.empty()) {
    if (non_blank(text)) parts.trace_text = std::string(text);
    return parts;
  }
  const std::string_view before = text.substr(0, opens.front());
  if (non_blank(before)) parts.trace_text = std::string(before);
  const std::size_t close = text.find(kCifClose, opens.front());
  const std::size_t end = close == std::string_view::npos ? text.size() : close + kCifClose.size();
  parts.cif_text = std::string(text.substr(opens.front(), end - opens.front()));
  return parts;
}

}  // namespace crystalign
