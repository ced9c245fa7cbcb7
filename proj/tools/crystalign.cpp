#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "crystalign/grpo/toy.hpp"
#include "crystalign/harness/pipeline.hpp"

using namespace crystalign;
using nlohmann::json;

namespace {

std::string shortest(double x) {
  std::ostringstream ss;
  ss.precision(15);
  ss << x;
  return ss.str();
}

CrystalStructure read_structure(const std::string& path) { return parse_ciflite(read_text_file(path)); }

PromptConstraints read_prompt(const std::string& text, const std::string& file) {
  if (!file.empty()) return parse_prompt(read_text_file(file));
  return parse_prompt(text);
}

json validity_json(const ValidityReport& r) {
  json j{{"parsed", r.parsed},
         {"structural", r.structural},
         {"chemical", r.chemical},
         {"composition_match", r.composition_match},
         {"gate", validity_gate(r)},
         {"failed_checks", r.failed_checks}};
  j["spacegroup_match"] = r.spacegroup_match ? json(*r.spacegroup_match) : json(nullptr);
  if (r.oxidation) j["oxidation_states"] = *r.oxidation;
  return j;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crystalign: crystal generation rewards, checks and evaluation"};
  app.require_subcommand(1);

  // validate
  std::string cif_path, prompt_text, prompt_file;
  double sym_tol = kDefaultSymmetryTolerance;
  auto* validate = app.add_subcommand("validate", "Structural, chemical and prompt-consistency checks");
  validate->add_option("--cif", cif_path, "CIF-lite file")->required();
  validate->add_option("--prompt", prompt_text, "Prompt text with constraints");
  validate->add_option("--prompt-file", prompt_file, "File holding the prompt text");
  validate->add_option("--tol", sym_tol, "Symmetry tolerance (Angstrom)");

  // reward
  std::optional<double> ehull, value, low, high;
  double e0 = 1.0;
  auto* reward = app.add_subcommand("reward", "Stability or range reward for given numbers");
  reward->add_option("--ehull", ehull, "Energy above hull (eV/atom)");
  reward->add_option("--e0", e0, "Stability reward scale");
  reward->add_option("--value", value, "Property value for the range reward");
  reward->add_option("--low", low, "Range lower bound");
  reward->add_option("--high", high, "Range upper bound");

  // hull
  std::string phases_path, formula;
  double energy = 0.0;
  auto* hull = app.add_subcommand("hull", "Energy above the convex hull");
  hull->add_option("--phases", phases_path, "Reference phases file (default: built-in)");
  hull->add_option("--formula", formula, "Candidate formula")->required();
  hull->add_option("--energy", energy, "Candidate formation energy (eV/atom)")->required();

  // symmetry
  auto* symmetry = app.add_subcommand("symmetry", "Detect the space group");
  symmetry->add_option("--cif", cif_path, "CIF-lite file")->required();
  symmetry->add_option("--tol", sym_tol, "Symmetry tolerance (Angstrom)");

  // trace
  std::string response_path;
  auto* trace = app.add_subcommand("trace", "Render a trace for a structure, or check a response's trace");
  auto* trace_cif = trace->add_option("--cif", cif_path, "Render the trace for this structure");
  auto* trace_resp = trace->add_option("--response", response_path, "Check trace-vs-structure consistency of a response");
  trace->add_option("--prompt", prompt_text, "Prompt text for optional trace sections");
  trace_cif->excludes(trace_resp);
  trace_resp->excludes(trace_cif);

  // metrics
  std::string structures_path, references_path;
  auto* metrics = app.add_subcommand("metrics", "Uniqueness and novelty of a structure set");
  metrics->add_option("--structures", structures_path, "File with CIF-lite blocks")->required();
  metrics->add_option("--references", references_path, "Reference structure set");

  // grpo-demo
  std::uint64_t seed = 7;
  int iterations = 200;
  std::string out_path;
  auto* demo = app.add_subcommand("grpo-demo", "Train the toy lattice policy and print its log as CSV");
  demo->add_option("--seed", seed, "Random seed");
  demo->add_option("--iterations", iterations, "Training iterations")->check(CLI::NonNegativeNumber);
  demo->add_option("--out", out_path, "Write the CSV here instead of stdout");

  // evaluate
  std::string config_path, samples_path, outdir;
  std::optional<int> workers, heavy_workers;
  std::optional<double> timeout;
  bool no_relax = false;
  std::vector<std::string> overrides;
  auto* evaluate = app.add_subcommand("evaluate", "Run the batch evaluation pipeline");
  evaluate->add_option("--config", config_path, "Sectioned key-value config file");
  evaluate->add_option("--samples", samples_path, "JSON-lines samples (overrides input.samples)");
  evaluate->add_option("--workers", workers, "Light worker count (overrides run.workers)");
  evaluate->add_option("--heavy-workers", heavy_workers, "Heavy worker count (overrides run.heavy_workers)");
  evaluate->add_option("--out", outdir, "Output directory (overrides run.output_dir)");
  evaluate->add_option("--timeout", timeout, "Per-sample heavy timeout in seconds");
  evaluate->add_flag("--no-relax", no_relax, "Skip relaxation before energy evaluation");
  evaluate->add_option("--set", overrides, "Override any key, e.g. --set rewards.e0=0.5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) {
      const auto s = read_structure(cif_path);
      ValidityOptions opt;
      opt.symmetry_tolerance = sym_tol;
      print(validity_json(assess_validity(s, read_prompt(prompt_text, prompt_file), OxidationTable::builtin(), opt)));
    } else if (*reward) {
      if (ehull) {
        std::cout << shortest(stability_reward(*ehull, e0)) << "\n";
      } else if (value && low && high) {
        std::cout << shortest(range_reward(*value, Interval{*low, *high})) << "\n";
      } else {
        std::cerr << "reward: give --ehull, or --value with --low and --high\n";
        return 1;
      }
    } else if (*hull) {
      const auto phases = phases_path.empty() ? builtin_phases() : parse_phases(read_text_file(phases_path));
      const auto r = energy_above_hull({parse_formula(formula), energy, ""}, phases);
      json dec = json::array();
      for (const auto& [p, w] : r.decomposition) dec.push_back({{"label", p.label}, {"weight", w}});
      print({{"e_hull", r.e_hull}, {"hull_energy", r.hull_energy}, {"stable", is_stable(r.e_hull)}, {"decomposition", dec}});
    } else if (*symmetry) {
      const auto r = detect_spacegroup(read_structure(cif_path), sym_tol);
      print({{"number", r.number},
             {"symbol", r.symbol},
             {"crystal_system", to_string(r.crystal_system)},
             {"operations", r.operations.size()},
             {"ambiguous", r.ambiguous}});
    } else if (*trace) {
      if (!cif_path.empty()) {
        const auto s = read_structure(cif_path);
        const auto sym = detect_spacegroup(s);
        const auto ox = find_oxidation_assignment(s.composition(), OxidationTable::builtin(), {});
        std::cout << synthesize_trace(s, parse_prompt(prompt_text), sym, ox).text << "\n";
      } else if (!response_path.empty()) {
        const auto parts = extract_response_parts(read_text_file(response_path));
        if (!parts.cif_text) throw ParseError(ParseErrorKind::MissingMarker, 0, 0, "response has no <CIF> block");
        if (!parts.trace_text) throw ParseError(ParseErrorKind::MissingMarker, 0, 0, "response has no trace text");
        const auto s = parse_ciflite(*parts.cif_text);
        const auto c = trace_consistency(parse_trace(*parts.trace_text), s, detect_spacegroup(s));
        print({{"site_match", c.site_match},
               {"volume_rel_diff", c.volume_rel_diff ? json(*c.volume_rel_diff) : json(nullptr)},
               {"bond_rel_diff", c.bond_rel_diff ? json(*c.bond_rel_diff) : json(nullptr)}});
      } else {
        std::cerr << "trace: give --cif or --response\n";
        return 1;
      }
    } else if (*metrics) {
      const auto batch = parse_structure_set(read_text_file(structures_path));
      std::vector<CrystalStructure> refs;
      if (!references_path.empty()) refs = parse_structure_set(read_text_file(references_path));
      const ReferenceIndex index(refs);
      json j{{"count", batch.size()}};
      if (!batch.empty()) {
        j["uniqueness"] = uniqueness(batch);
        j["novelty"] = novelty(batch, index);
      }
      print(j);
    } else if (*demo) {
      const ToyLatticeTask task;
      const PairPotentialBackend backend;
      PromptConstraints prompt;
      prompt.formula = parse_formula(task.element);
      const auto log =
          train_toy_policy(GrpoConfig{}, task, make_combined_reward(backend, builtin_phases(), prompt), iterations, seed);
      if (out_path.empty()) {
        std::cout << log.csv();
      } else {
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write " + out_path);
        f << log.csv();
      }
      const auto modal = modal_tokens(log.policy);
      std::cerr << "modal structure: " << ToyLatticeTask::kPrototypes[modal[0]] << " a = "
                << format_fixed(task.lattice_constant(modal[1]), 3) << " A\n";
    } else if (*evaluate) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!samples_path.empty()) cfg.samples = samples_path;
      if (workers) cfg.workers = *workers;
      if (heavy_workers) cfg.heavy_workers = *heavy_workers;
      if (!outdir.empty()) cfg.output_dir = outdir;
      if (timeout) cfg.timeout_seconds = *timeout;
      if (no_relax) cfg.relax = false;
      const auto result = run_evaluation(cfg);
      emit_report(result.report, result.rows, cfg.output_dir);
      std::cout << result.report.markdown();
      std::cerr << result.rows.size() << " samples evaluated; reports written to " << cfg.output_dir << "\n";
    }
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const CoverageError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
