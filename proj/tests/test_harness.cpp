#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <stdexcept>

#include "crystalign/harness/pipeline.hpp"
#include "crystalign/harness/synthetic.hpp"
#include "fixtures.hpp"

using namespace crystalign;

namespace {

EvaluationContext quick_context(int workers) {
  RunConfig c;
  c.workers = workers;
  c.relax_steps = 20;
  return EvaluationContext::from_config(c);
}

std::string read_file(const std::filesystem::path& p) { return read_text_file(p.string()); }

}  // namespace

TEST(Config, SectionsAndOverrides) {
  const auto c = parse_config(
      "# comment\n[run]\nworkers = 4\nrelax = no\nseed = 9\n[rewards]\ne0 = 0.5\n[validity]\n"
      "min_pair_distance = 1.5\n[input]\nsamples = \"s.jsonl\"\n",
      "/data");
  EXPECT_EQ(c.workers, 4);
  EXPECT_FALSE(c.relax);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_DOUBLE_EQ(c.e0, 0.5);
  EXPECT_DOUBLE_EQ(c.validity.thresholds.min_pair_distance, 1.5);
  EXPECT_EQ(c.samples, "/data/s.jsonl");
  RunConfig d = c;
  set_config_value(d, "run.workers", "2");
  EXPECT_EQ(d.workers, 2);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("[run]\nnope = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("workers = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nworkers = many\n"), ConfigError);
  EXPECT_THROW(parse_config("[run\n"), ConfigError);
  RunConfig c;
  c.samples = "x";
  c.workers = 0;
  EXPECT_THROW(c.validate(false), ConfigError);
  c.workers = 1;
  c.samples = "/nonexistent/samples.jsonl";
  EXPECT_THROW(c.validate(true), ConfigError);
}

TEST(Pool, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(500);
  parallel_for_index(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for_index(3, 0, [](std::size_t) {}), ConfigError);
}

TEST(Pool, PropagatesExceptions) {
  EXPECT_THROW(parallel_for_index(50, 3,
                                  [](std::size_t i) {
                                    if (i == 17) throw std::runtime_error("boom");
                                  }),
               std::runtime_error);
}

TEST(Pipeline, OutputIndependentOfWorkerCount) {
  const auto samples = make_synthetic_samples(6, 4, 3);
  const auto one = evaluate_samples(samples, quick_context(1));
  const std::string csv = samples_csv(one.rows);
  EXPECT_EQ(one.rows.size(), 24u);
  for (int w : {2, 4}) {
    const auto r = evaluate_samples(samples, quick_context(w));
    EXPECT_EQ(samples_csv(r.rows), csv);
    EXPECT_EQ(r.report.csv(), one.report.csv());
  }
}

TEST(Pipeline, EmptyBatchWritesHeaders) {
  const auto res = evaluate_samples({}, quick_context(2));
  EXPECT_TRUE(res.report.metrics.empty());
  const auto dir = std::filesystem::temp_directory_path() / "crystalign_empty_batch";
  std::filesystem::remove_all(dir);
  emit_report(res.report, res.rows, dir);
  EXPECT_EQ(read_file(dir / "metrics.csv"), "metric,value,standard_error,count\n");
  const std::string samples = read_file(dir / "samples.csv");
  EXPECT_EQ(std::count(samples.begin(), samples.end(), '\n'), 1);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, AllUnparseableBatch) {
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 5; ++i) samples.push_back({"q", "The chemical formula is NaCl.", "no structure here", 0});
  const auto res = evaluate_samples(samples, quick_context(2));
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.parse_status, "missing-marker");
    EXPECT_EQ(r.energy_status, "skipped");
    EXPECT_DOUBLE_EQ(r.reward.r_target, 0.0);
  }
  const auto* sv = res.report.find("structural_validity");
  ASSERT_NE(sv, nullptr);
  EXPECT_DOUBLE_EQ(sv->value, 0.0);
  EXPECT_EQ(sv->count, 5u);
}

TEST(Pipeline, BadSampleDoesNotStopBatch) {
  const std::string good = write_ciflite(fixtures::rocksalt());
  const std::vector<SampleRecord> samples{
      {"a", "The chemical formula is NaCl.", good, 0},
      {"a", "The chemical formula is NaCl.", "<CIF>\nnot a block\n</CIF>", 0},
      {"b", "The chemical formula is XyZ.", good, 0},
      {"b", "The chemical formula is NaCl.", good + good, 0},
  };
  const auto res = evaluate_samples(samples, quick_context(2));
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_EQ(res.rows[0].parse_status, "ok");
  EXPECT_TRUE(res.rows[0].validity.structural);
  EXPECT_TRUE(res.rows[0].validity.composition_match);
  EXPECT_EQ(res.rows[0].energy_status, "ok");
  EXPECT_NE(res.rows[1].parse_status, "ok");
  EXPECT_FALSE(res.rows[2].errors.empty());
  EXPECT_EQ(res.rows[3].parse_status, "multiple-blocks");
  EXPECT_EQ(res.rows[1].sample_index, 1u);
  EXPECT_EQ(res.rows[3].sample_index, 1u);
}

TEST(Pipeline, EmitIsByteDeterministic) {
  const auto samples = make_synthetic_samples(3, 3, 5);
  const auto a = evaluate_samples(samples, quick_context(1));
  const auto b = evaluate_samples(samples, quick_context(3));
  const auto base = std::filesystem::temp_directory_path();
  emit_report(a.report, a.rows, base / "crystalign_emit_a");
  emit_report(b.report, b.rows, base / "crystalign_emit_b");
  for (const char* f : {"metrics.csv", "metrics.md", "samples.csv"})
    EXPECT_EQ(read_file(base / "crystalign_emit_a" / f), read_file(base / "crystalign_emit_b" / f)) << f;
  std::filesystem::remove_all(base / "crystalign_emit_a");
  std::filesystem::remove_all(base / "crystalign_emit_b");
}

TEST(Pipeline, CsvQuotesFields) {
  EvaluationRow r;
  r.prompt_id = "p,1";
  r.errors = {"say \"hi\"", "two"};
  const auto csv = samples_csv({r});
  EXPECT_NE(csv.find("\"p,1\""), std::string::npos);
  EXPECT_NE(csv.find("\"say \"\"hi\"\"; two\""), std::string::npos);
}

TEST(Synthetic, DeterministicForSeed) {
  const auto a = make_synthetic_samples(4, 4, 11), b = make_synthetic_samples(4, 4, 11);
  ASSERT_EQ(a.size(), 16u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_jsonl(a[i]), to_jsonl(b[i]));
  for (const auto& p : synthetic_prototypes())
    EXPECT_EQ(detect_spacegroup(p.structure).number, p.spacegroup) << p.formula;
}
