#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "crystalign/ciflite/ciflite.hpp"
#include "crystalign/ciflite/prompt.hpp"
#include "crystalign/ciflite/samples.hpp"
#include "fixtures.hpp"

using namespace crystalign;

TEST(CifLite, CalciteParsesToTenSites) {
  const auto s = fixtures::calcite();
  EXPECT_EQ(s.size(), 10u);
  EXPECT_NEAR(s.volume(), 122.95, 0.005 * 122.95);
  EXPECT_EQ(reduced_formula(s.composition()), "CCaO3");
}

TEST(CifLite, NegativeZeroCoordinatesWrapToZero) {
  const auto s = fixtures::calcite();
  for (double x : s.sites()[1].frac) EXPECT_EQ(x, 0.0);
}

TEST(CifLite, WriterUsesDeclaredPrecision) {
  const std::string out = write_ciflite(fixtures::rocksalt());
  EXPECT_NE(out.find("5.640000 5.640000 5.640000"), std::string::npos) << out;
  EXPECT_NE(out.find("90.0000 90.0000 90.0000"), std::string::npos);
  EXPECT_NE(out.find("Na 1 0.00000000 0.00000000 0.00000000"), std::string::npos);
  EXPECT_EQ(out.rfind("<CIF>P1\n", 0), 0u);
  EXPECT_EQ(out.substr(out.size() - 6), "</CIF>");
}

struct BadBlock {
  const char* text;
  ParseErrorKind kind;
};

class CifLiteErrors : public ::testing::TestWithParam<BadBlock> {};

TEST_P(CifLiteErrors, ReportsKind) {
  try {
    parse_ciflite(GetParam().text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), GetParam().kind) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Malformed, CifLiteErrors,
    ::testing::Values(BadBlock{"P1\n1 1 1\n90 90 90\nNa 1 0 0 0", ParseErrorKind::MissingMarker},
                      BadBlock{"<CIF>P1\n4 4 4\n90 90 90\nNa 1 0 0 0", ParseErrorKind::MissingMarker},
                      BadBlock{"<CIF>P1\n4 4 4\n90 90 90\nNa 1 0 0 0</CIF><CIF>", ParseErrorKind::MultipleBlocks},
                      BadBlock{"<CIF>P1\n4 4\n90 90 90\nNa 1 0 0 0</CIF>", ParseErrorKind::FieldArity},
                      BadBlock{"<CIF>P1\n4 4 x\n90 90 90\nNa 1 0 0 0</CIF>", ParseErrorKind::BadNumber},
                      BadBlock{"<CIF>P1\n4 4 4\n90 90 90\nXq 1 0 0 0</CIF>", ParseErrorKind::UnknownElement},
                      BadBlock{"<CIF>P1\n4 4 4\n90 90 90\nNa 2 0 0 0</CIF>", ParseErrorKind::BadCount},
                      BadBlock{"<CIF>P1\n4 4 4\n120 120 120\nNa 1 0 0 0</CIF>", ParseErrorKind::BadGeometry},
                      BadBlock{"<CIF>P1\n4 4 4\n90 90 90</CIF>", ParseErrorKind::FieldArity},
                      BadBlock{"<CIF>Fm-3m\n4 4 4\n90 90 90\nNa 1 0 0 0</CIF>", ParseErrorKind::FieldArity}));

TEST(CifLite, ErrorCarriesLineAndColumn) {
  try {
    parse_ciflite("<CIF>P1\n4 4 4\n90 90 90\nNa 1 0 0 0\nCl 1 0.5 0.5 zz</CIF>");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_EQ(e.column(), 14u);
  }
}

TEST(CifLiteProperty, WriteParseIsIdempotent) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = fixtures::random_structure(rng, {"Ca", "C", "O", "Na", "Cl"}, 8);
    const std::string once = write_ciflite(s);
    const std::string twice = write_ciflite(parse_ciflite(once));
    ASSERT_EQ(once, twice) << "trial " << trial;
  }
}

TEST(Response, SplitsTraceAndBlock) {
  const auto parts = extract_response_parts("Material Report: ...\n" + fixtures::kCalciteCif + "\n");
  ASSERT_TRUE(parts.trace_text);
  ASSERT_TRUE(parts.cif_text);
  EXPECT_EQ(parse_ciflite(*parts.cif_text).size(), 10u);
}

TEST(Response, TwoBlocksAreRejected) {
  EXPECT_THROW(extract_response_parts(fixtures::kCalciteCif + fixtures::kCalciteCif), MultipleBlocksError);
}

TEST(Prompt, ExtractsConstraints) {
  const auto p = parse_prompt(
      "Below is a description of a bulk material. The chemical formula is CaCO3. The space-group number is 167. "
      "The band gap is 4.9995. The bulk modulus is between 60 and 80. Generate the structure:");
  ASSERT_TRUE(p.formula);
  EXPECT_EQ(reduced_formula(*p.formula), "CCaO3");
  EXPECT_EQ(p.formula_text, "CaCO3");
  EXPECT_EQ(p.spacegroup_number, 167);
  EXPECT_DOUBLE_EQ(*p.band_gap, 4.9995);
  ASSERT_EQ(p.property_ranges.count("bulk_modulus"), 1u);
  EXPECT_EQ(p.property_ranges.at("bulk_modulus"), (Interval{60, 80}));
}

TEST(Prompt, EmptyPromptHasNoConstraints) { EXPECT_TRUE(parse_prompt("Generate any crystal.").empty()); }

TEST(Prompt, BadSpacegroupIsRejected) {
  EXPECT_THROW(parse_prompt("The space-group number is 231."), ParseError);
  EXPECT_THROW(parse_prompt("The space-group number is twelve."), ParseError);
}

TEST(Samples, ReadsJsonLinesInOrder) {
  std::istringstream in(
      "{\"prompt_id\":\"a\",\"prompt_text\":\"x\",\"response_text\":\"y\"}\n\n"
      "{\"prompt_id\":\"b\",\"prompt_text\":\"x2\",\"response_text\":\"y2\"}\n");
  const auto s = parse_samples(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].prompt_id, "a");
  EXPECT_EQ(s[1].line, 3u);
  std::istringstream back(to_jsonl(s[1]));
  EXPECT_EQ(parse_samples(back)[0].response_text, "y2");
}

TEST(Samples, MalformedRecordsReportLine) {
  std::istringstream bad("{\"prompt_id\":\"a\",\"prompt_text\":\"x\",\"response_text\":\"y\"}\n{oops\n");
  try {
    parse_samples(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::BadJson);
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream missing("{\"prompt_id\":\"a\",\"prompt_text\":\"x\"}\n");
  EXPECT_THROW(parse_samples(missing), ParseError);
}
