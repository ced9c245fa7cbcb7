#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crystalign/ciflite/ciflite.hpp"
#include "crystalign/ciflite/prompt.hpp"
#include "crystalign/ciflite/samples.hpp"
#include "crystalign/energetics/backend.hpp"
#include "crystalign/energetics/hull.hpp"
#include "crystalign/energetics/properties.hpp"
#include "crystalign/energetics/relax.hpp"
#include "crystalign/harness/config.hpp"
#include "crystalign/harness/pool.hpp"
#include "crystalign/metrics/metrics.hpp"
#include "crystalign/rewards/rewards.hpp"
#include "crystalign/symmetry/detect.hpp"
#include "crystalign/traces/trace.hpp"
#include "crystalign/validity/checks.hpp"

namespace crystalign {

inline constexpr const char* kBulkModulusKey = "bulk_modulus";

// Every CIF-lite block in a text, parsed separately.
inline std::vector<CrystalStructure> parse_structure_set(std::string_view text) {
  std::vector<CrystalStructure> out;
  std::size_t pos = 0;
  while ((pos = text.find(kCifOpen, pos)) != std::string_view::npos) {
    const std::size_t end = text.find(kCifClose, pos);
    if (end == std::string_view::npos) throw ParseError(ParseErrorKind::MissingMarker, 0, 0, "unterminated <CIF> block");
    out.push_back(parse_ciflite(text.substr(pos, end + kCifClose.size() - pos)));
    pos = end + kCifClose.size();
  }
  return out;
}

// Immutable inputs shared by every worker.
struct EvaluationContext {
  RunConfig config;
  std::shared_ptr<const EnergyBackend> backend;
  std::vector<PhaseEntry> phases;
  OxidationTable oxidation;
  ReferenceIndex references;

  static EvaluationContext from_config(const RunConfig& c) {
    EvaluationContext ctx;
    ctx.config = c;
    const PairParameters params =
        c.pair_parameters.empty() ? PairParameters::builtin() : PairParameters::parse(read_text_file(c.pair_parameters));
    ctx.backend = std::make_shared<PairPotentialBackend>(params);
    ctx.phases = c.reference_phases.empty() ? builtin_phases() : parse_phases(read_text_file(c.reference_phases));
    ctx.oxidation =
        c.oxidation_table.empty() ? OxidationTable::builtin() : OxidationTable::parse(read_text_file(c.oxidation_table));
    std::vector<CrystalStructure> refs;
    if (!c.reference_structures.empty()) refs = parse_structure_set(read_text_file(c.reference_structures));
    ctx.references = ReferenceIndex(refs, c.matcher);
    return ctx;
  }
};

struct EvaluationRow {
  std::string prompt_id;
  std::size_t sample_index = 0;  // position among samples of the same prompt
  std::string parse_status = "ok";
  ValidityReport validity = ValidityReport::unparseable("not evaluated");
  std::optional<int> spacegroup;
  std::string energy_status = "skipped";
  std::optional<double> formation_energy;
  std::optional<double> e_hull;
  RewardBreakdown reward;
  std::optional<TraceConsistency> trace;
  bool unique = false, novel = false, stable = false;
  std::vector<std::string> errors;

  // Working state, not serialized.
  std::optional<CrystalStructure> structure;
  std::optional<MatchForm> form;
  PromptConstraints prompt;
  PropertyMeasurements measured;
};

namespace pipeline_detail {

inline void light_stage(EvaluationRow& row, const SampleRecord& rec, const EvaluationContext& ctx) {
  try {
    row.prompt = parse_prompt(rec.prompt_text);
  } catch (const ParseError& e) {
    row.errors.push_back(std::string("prompt: ") + e.what());
  }
  std::optional<std::string> cif, trace_text;
  try {
    auto parts = extract_response_parts(rec.response_text);
    cif = std::move(parts.cif_text);
    trace_text = std::move(parts.trace_text);
    if (!cif) throw ParseError(ParseErrorKind::MissingMarker, 0, 0, "no <CIF> block in the response");
    row.structure = parse_ciflite(*cif);
  } catch (const ParseError& e) {
    row.parse_status = to_string(e.kind());
    row.validity = ValidityReport::unparseable(e.what());
    return;
  } catch (const Error& e) {
    row.parse_status = "invalid_structure";
    row.validity = ValidityReport::unparseable(e.what());
    return;
  }
  const CrystalStructure& s = *row.structure;
  ValidityOptions vo = ctx.config.validity;
  vo.check_spacegroup = false;  // decided below from one detection run
  row.validity = assess_validity(s, row.prompt, ctx.oxidation, vo);
  std::optional<SpacegroupResult> sym;
  try {
    sym = detect_spacegroup(s, ctx.config.validity.symmetry_tolerance);
    row.spacegroup = sym->number;
  } catch (const Error& e) {
    row.errors.push_back(std::string("symmetry: ") + e.what());
  }
  if (row.prompt.spacegroup_number) {
    row.validity.spacegroup_match = sym && sym->number == *row.prompt.spacegroup_number;
    if (!*row.validity.spacegroup_match)
      row.validity.failed_checks.push_back("spacegroup: " + (sym ? std::to_string(sym->number) : std::string("undetected")) +
                                           " != " + std::to_string(*row.prompt.spacegroup_number));
  }
  try {
    row.form = make_match_form(s, ctx.config.matcher);
  } catch (const Error& e) {
    row.errors.push_back(std::string("matcher: ") + e.what());
  }
  if (trace_text && sym) row.trace = trace_consistency(parse_trace(*trace_text), s, *sym);
}

inline void heavy_stage(EvaluationRow& row, const EvaluationContext& ctx) {
  const CrystalStructure& s0 = *row.structure;
  const auto& backend = *ctx.backend;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(ctx.config.timeout_seconds));
  try {
    CrystalStructure s = s0;
    if (ctx.config.relax) {
      RelaxOptions ro;
      ro.max_steps = ctx.config.relax_steps;
      ro.force_tol = ctx.config.force_tol;
      ro.deadline = deadline;
      s = relax_positions(backend, s0, ro).structure;
    }
    row.formation_energy = formation_energy(backend, s);
    const PhaseEntry cand{s.composition(), *row.formation_energy, "sample:" + row.prompt_id};
    row.e_hull = energy_above_hull(cand, ctx.phases).e_hull;
    if (row.prompt.property_ranges.count(kBulkModulusKey)) {
      if (std::chrono::steady_clock::now() > deadline) throw TimeoutError("deadline passed before property evaluation");
      try {
        row.measured[kBulkModulusKey] = bulk_modulus(backend, s);
      } catch (const Error& e) {
        row.errors.push_back(std::string("bulk modulus: ") + e.what());
      }
    }
    row.energy_status = "ok";
  } catch (const TimeoutError& e) {
    row.energy_status = "timeout";
    row.errors.push_back(std::string("energy: ") + e.what());
  } catch (const RelaxationError& e) {
    row.energy_status = "relaxation_error";
    row.errors.push_back(std::string("energy: ") + e.what());
  } catch (const CoverageError& e) {
    row.energy_status = "coverage_error";
    row.errors.push_back(std::string("hull: ") + e.what());
  } catch (const ConfigError& e) {
    row.energy_status = "unsupported";
    row.errors.push_back(std::string("energy: ") + e.what());
  } catch (const Error& e) {
    row.energy_status = "error";
    row.errors.push_back(std::string("energy: ") + e.what());
  }
}

inline void reward_stage(EvaluationRow& row, const EvaluationContext& ctx) {
  const auto& c = ctx.config;
  if (row.prompt.property_ranges.empty()) {
    row.reward = combined_reward(row.validity, row.e_hull, c.weights, c.e0);
    return;
  }
  PropertyMeasurements m;
  for (const auto& [key, iv] : row.prompt.property_ranges) {
    auto it = row.measured.find(key);
    m[key] = it == row.measured.end() ? std::nullopt : it->second;
  }
  if (row.prompt.spacegroup_number)
    m[kSpacegroupKey] = row.spacegroup ? std::optional<double>(*row.spacegroup) : std::nullopt;
  row.reward = conditioned_breakdown(row.validity, row.e_hull, row.prompt, m, c.weights, c.e0);
}

}  // namespace pipeline_detail

struct EvaluationResult {
  std::vector<EvaluationRow> rows;
  MetricReport report;
};

inline MetricReport build_report(std::vector<EvaluationRow>& rows, const EvaluationContext& ctx) {
  MetricReport rep;
  if (rows.empty()) return rep;
  auto proportion = [&](const std::string& name, const std::vector<bool>& flags) {
    MetricValue m{name, 0.0, 0.0, 0, true};
    if (!flags.empty()) {
      const Aggregate a = aggregate(flags);
      m.value = a.mean;
      m.standard_error = a.standard_error;
      m.count = a.count;
    }
    rep.metrics.push_back(m);
  };
  std::vector<bool> structural, chemical, composition, spacegroup;
  for (const auto& r : rows) {
    structural.push_back(r.validity.parsed && r.validity.structural);
    chemical.push_back(r.validity.parsed && r.validity.chemical);
    composition.push_back(r.validity.parsed && r.validity.composition_match);
    if (r.prompt.spacegroup_number) spacegroup.push_back(r.validity.spacegroup_match.value_or(false));
  }
  proportion("structural_validity", structural);
  proportion("chemical_validity", chemical);
  proportion("composition_consistency", composition);
  proportion("spacegroup_consistency", spacegroup);

  std::vector<std::size_t> parsed;
  std::vector<MatchForm> forms;
  std::vector<std::string> groups;
  std::vector<std::optional<double>> e_hulls;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].form) continue;
    parsed.push_back(i);
    forms.push_back(*rows[i].form);
    groups.push_back(rows[i].prompt_id);
    e_hulls.push_back(rows[i].e_hull);
  }
  const Clustering clusters = cluster_forms(forms, ctx.config.matcher, ctx.config.uniqueness_per_prompt ? &groups : nullptr);
  const auto novel = novel_flags(forms, ctx.references);
  const auto sun = sun_flags(forms, e_hulls, ctx.references, clusters);
  std::vector<bool> unique_f, novel_f, stable_f, sun_f;
  std::vector<double> hulls;
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    auto& r = rows[parsed[k]];
    r.unique = clusters.is_representative(k);
    r.novel = novel[k];
    r.stable = r.e_hull && is_stable(*r.e_hull);
    unique_f.push_back(r.unique);
    novel_f.push_back(r.novel);
    stable_f.push_back(r.stable);
    sun_f.push_back(sun[k]);
    if (r.e_hull) hulls.push_back(*r.e_hull);
  }
  proportion("uniqueness", unique_f);
  proportion("novelty", novel_f);
  MetricValue eh{"mean_e_hull", 0.0, 0.0, 0, false};
  if (!hulls.empty()) {
    const Aggregate a = aggregate(hulls);
    eh = {"mean_e_hull", a.mean, a.standard_error, a.count, false};
  }
  rep.metrics.push_back(eh);
  proportion("stability_rate", stable_f);
  proportion("sun_ratio", sun_f);
  std::vector<double> rewards;
  for (const auto& r : rows) rewards.push_back(r.reward.r_target);
  const Aggregate ar = aggregate(rewards);
  rep.metrics.push_back({"mean_reward", ar.mean, ar.standard_error, ar.count, false});
  return rep;
}

// Light checks on one pool, energies on the other, then rewards and
// metrics. Rows are stored by input index, so output never depends on the
// worker count or scheduling.
inline EvaluationResult evaluate_samples(const std::vector<SampleRecord>& samples, const EvaluationContext& ctx) {
  const auto& c = ctx.config;
  EvaluationResult res;
  res.rows.resize(samples.size());
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    res.rows[i].prompt_id = samples[i].prompt_id;
    res.rows[i].sample_index = seen[samples[i].prompt_id]++;
  }
  auto isolate = [&](std::size_t i, const char* stage, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      auto& row = res.rows[i];
      row.errors.push_back(std::string(stage) + " failure: " + e.what());
      if (std::string(stage) == "light") {
        row.parse_status = "evaluation_error";
        row.structure.reset();
        row.validity = ValidityReport::unparseable(e.what());
      }
    }
  };
  parallel_for_index(samples.size(), c.workers, [&](std::size_t i) {
    isolate(i, "light", [&] { pipeline_detail::light_stage(res.rows[i], samples[i], ctx); });
  });
  std::vector<std::size_t> heavy;
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    if (res.rows[i].structure) heavy.push_back(i);
  parallel_for_index(heavy.size(), c.heavy_workers > 0 ? c.heavy_workers : c.workers, [&](std::size_t k) {
    isolate(heavy[k], "heavy", [&] { pipeline_detail::heavy_stage(res.rows[heavy[k]], ctx); });
  });
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    isolate(i, "reward", [&] { pipeline_detail::reward_stage(res.rows[i], ctx); });
  res.report = build_report(res.rows, ctx);
  return res;
}

inline EvaluationResult run_evaluation(const RunConfig& config) {
  config.validate();
  const auto samples = load_samples(config.samples);
  return evaluate_samples(samples, EvaluationContext::from_config(config));
}

namespace pipeline_detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

inline std::string opt_num(const std::optional<double>& v, int places = 6) { return v ? format_fixed(*v, places) : ""; }

}  // namespace pipeline_detail

inline std::string samples_csv(const std::vector<EvaluationRow>& rows) {
  namespace pd = pipeline_detail;
  std::string out =
      "prompt_id,sample_index,parse_status,structural,chemical,composition_match,spacegroup_match,spacegroup,"
      "energy_status,formation_energy,e_hull,r_validity,r_stability,r_property,r_target,site_match,volume_rel_diff,"
      "bond_rel_diff,unique,novel,stable,errors\n";
  auto b = [](bool v) { return std::string(v ? "1" : "0"); };
  for (const auto& r : rows) {
    std::string errs;
    for (const auto& e : r.errors) errs += (errs.empty() ? "" : "; ") + e;
    for (const auto& a : r.reward.anomalies) errs += (errs.empty() ? "" : "; ") + a;
    out += pd::csv_field(r.prompt_id) + "," + std::to_string(r.sample_index) + "," + r.parse_status + "," +
           b(r.validity.parsed && r.validity.structural) + "," + b(r.validity.parsed && r.validity.chemical) + "," +
           b(r.validity.parsed && r.validity.composition_match) + "," +
           (r.validity.spacegroup_match ? b(*r.validity.spacegroup_match) : "") + "," +
           (r.spacegroup ? std::to_string(*r.spacegroup) : "") + "," + r.energy_status + "," +
           pd::opt_num(r.formation_energy) + "," + pd::opt_num(r.e_hull) + "," + std::to_string(r.reward.r_validity()) +
           "," + pd::opt_num(r.reward.r_stability) + "," + format_fixed(r.reward.r_property, 6) + "," +
           format_fixed(r.reward.r_target, 6) + "," + (r.trace ? b(r.trace->site_match) : "") + "," +
           (r.trace ? pd::opt_num(r.trace->volume_rel_diff, 8) : "") + "," +
           (r.trace ? pd::opt_num(r.trace->bond_rel_diff, 8) : "") + "," + b(r.unique) + "," + b(r.novel) + "," +
           b(r.stable) + "," + pd::csv_field(errs) + "\n";
  }
  return out;
}

// Writes metrics.csv, metrics.md and samples.csv into outdir.
inline void emit_report(const MetricReport& report, const std::vector<EvaluationRow>& rows,
                        const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream f(outdir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + (outdir / name).string());
    f << body;
  };
  write("metrics.csv", report.csv());
  write("metrics.md", report.markdown());
  write("samples.csv", samples_csv(rows));
}

}  // namespace crystalign
