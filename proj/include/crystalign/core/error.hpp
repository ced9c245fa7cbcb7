#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crystalign {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lattice parameters that do not describe a cell with positive volume.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Missing data tables, unparameterized element pairs, bad config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's mathematical domain (e.g. L >= R).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate values.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ReductionError : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  MissingMarker,
  MultipleBlocks,
  FieldArity,
  BadNumber,
  UnknownElement,
  BadCount,
  BadGeometry,
  BadJson,
  MissingKey,
  BadValue,
};

inline const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::MissingMarker: return "missing-marker";
    case ParseErrorKind::MultipleBlocks: return "multiple-blocks";
    case ParseErrorKind::FieldArity: return "field-arity";
    case ParseErrorKind::BadNumber: return "bad-number";
    case ParseErrorKind::UnknownElement: return "unknown-element";
    case ParseErrorKind::BadCount: return "bad-count";
    case ParseErrorKind::BadGeometry: return "bad-geometry";
    case ParseErrorKind::BadJson: return "bad-json";
    case ParseErrorKind::MissingKey: return "missing-key";
    case ParseErrorKind::BadValue: return "bad-value";
  }
  return "unknown";
}

// Positioned parse failure. Line and column are 1-based; 0 means "not
// applicable" (e.g. a marker that is absent from the whole text).
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line, std::size_t column, const std::string& what)
      : Error(format(kind, line, column, what)), kind_(kind), line_(line), column_(column) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(ParseErrorKind kind, std::size_t line, std::size_t column,
                            const std::string& what) {
    std::string s = std::string(to_string(kind)) + ": ";
    if (line > 0) s += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    return s + what;
  }
  ParseErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

// A response holding more than one <CIF> block. Offsets are byte offsets of
// each "<CIF>" marker.
class MultipleBlocksError : public ParseError {
 public:
  explicit MultipleBlocksError(std::vector<std::size_t> offsets)
      : ParseError(ParseErrorKind::MultipleBlocks, 0, 0, describe(offsets)),
        offsets_(std::move(offsets)) {}
  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }

 private:
  static std::string describe(const std::vector<std::size_t>& offsets) {
    std::string s = std::to_string(offsets.size()) + " <CIF> blocks at offsets";
    for (auto o : offsets) s += " " + std::to_string(o);
    return s;
  }
  std::vector<std::size_t> offsets_;
};

// Candidate composition contains elements that no reference phase covers.
class CoverageError : public Error {
 public:
  explicit CoverageError(std::vector<std::string> missing)
      : Error(describe(missing)), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& missing) {
    std::string s = "reference phases do not cover composition";
    if (!missing.empty()) {
      s += "; missing:";
      for (const auto& m : missing) s += " " + m;
    }
    return s;
  }
  std::vector<std::string> missing_;
};

}  // namespace crystalign
