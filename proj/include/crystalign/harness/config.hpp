#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "crystalign/core/error.hpp"
#include "crystalign/core/text.hpp"
#include "crystalign/energetics/relax.hpp"
#include "crystalign/metrics/metrics.hpp"
#include "crystalign/rewards/rewards.hpp"
#include "crystalign/validity/checks.hpp"

namespace crystalign {

struct RunConfig {
  // [input]; empty optional paths select the built-in tables
  std::string samples;
  std::string reference_phases;
  std::string oxidation_table;
  std::string pair_parameters;
  std::string reference_structures;
  // [validity]
  ValidityOptions validity;
  // [rewards]
  RewardWeights weights;
  double e0 = 1.0;
  // [matcher]
  MatchConfig matcher;
  // [run]
  int workers = 1;
  int heavy_workers = 0;  // 0: same as workers
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  double timeout_seconds = 30.0;
  bool relax = true;
  int relax_steps = 200;
  double force_tol = 1e-3;
  bool uniqueness_per_prompt = false;

  void validate(bool check_files = true) const {
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (heavy_workers < 0) throw ConfigError("heavy_workers must be non-negative");
    if (!(timeout_seconds > 0)) throw ConfigError("timeout_seconds must be positive");
    if (relax_steps < 0 || !(force_tol > 0)) throw ConfigError("bad relaxation settings");
    if (!(e0 > 0)) throw ConfigError("e0 must be positive");
    validity.thresholds.validate();
    if (!(validity.symmetry_tolerance > 0)) throw ConfigError("symmetry tolerance must be positive");
    weights.validate();
    matcher.validate();
    if (samples.empty()) throw ConfigError("no samples file configured");
    if (check_files)
      for (const auto* p : {&samples, &reference_phases, &oxidation_table, &pair_parameters, &reference_structures})
        if (!p->empty() && !std::filesystem::exists(*p)) throw ConfigError("input file not found: " + *p);
  }
};

namespace harness_detail {

inline double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("");
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + ": expected a number, got '" + v + "'");
  }
}

inline long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + ": expected an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("config key " + key + ": expected true or false, got '" + v + "'");
}

}  // namespace harness_detail

// Sets one "section.key" entry. Relative paths resolve against base_dir.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value,
                             const std::filesystem::path& base_dir = {}) {
  namespace hd = harness_detail;
  auto path = [&](std::string& field) {
    const std::filesystem::path p(value);
    field = value.empty() || p.is_absolute() || base_dir.empty() ? value : (base_dir / p).lexically_normal().string();
  };
  auto real = [&](double& field) { field = hd::to_real(key, value); };
  auto integer = [&](int& field) { field = static_cast<int>(hd::to_integer(key, value)); };
  auto flag = [&](bool& field) { field = hd::to_bool(key, value); };
  auto& th = c.validity.thresholds;
  auto& ch = c.validity.chemical;

  if (key == "input.samples") path(c.samples);
  else if (key == "input.reference_phases") path(c.reference_phases);
  else if (key == "input.oxidation_table") path(c.oxidation_table);
  else if (key == "input.pair_parameters") path(c.pair_parameters);
  else if (key == "input.reference_structures") path(c.reference_structures);
  else if (key == "validity.min_pair_distance") real(th.min_pair_distance);
  else if (key == "validity.min_volume") real(th.min_volume);
  else if (key == "validity.min_length") real(th.min_length);
  else if (key == "validity.angle_low") real(th.angle_low);
  else if (key == "validity.angle_high") real(th.angle_high);
  else if (key == "validity.symmetry_tolerance") real(c.validity.symmetry_tolerance);
  else if (key == "validity.pauling_screen") flag(ch.pauling_screen);
  else if (key == "validity.single_element_valid") flag(ch.single_element_valid);
  else if (key == "validity.metal_alloys_valid") flag(ch.metal_alloys_valid);
  else if (key == "rewards.alpha_validity") real(c.weights.alpha_validity);
  else if (key == "rewards.alpha_stability") real(c.weights.alpha_stability);
  else if (key == "rewards.beta_property") real(c.weights.beta_property);
  else if (key == "rewards.e0") real(c.e0);
  else if (key == "matcher.length_tol") real(c.matcher.length_tol);
  else if (key == "matcher.angle_tol") real(c.matcher.angle_tol);
  else if (key == "matcher.site_tol") real(c.matcher.site_tol);
  else if (key == "run.workers") integer(c.workers);
  else if (key == "run.heavy_workers") integer(c.heavy_workers);
  else if (key == "run.seed") c.seed = static_cast<std::uint64_t>(hd::to_integer(key, value));
  else if (key == "run.output_dir") path(c.output_dir);
  else if (key == "run.timeout_seconds") real(c.timeout_seconds);
  else if (key == "run.relax") flag(c.relax);
  else if (key == "run.relax_steps") integer(c.relax_steps);
  else if (key == "run.force_tol") real(c.force_tol);
  else if (key == "run.uniqueness_per_prompt") flag(c.uniqueness_per_prompt);
  else throw ConfigError("unknown config key '" + key + "'");
}

// Flat sectioned key-value text: "[section]" headers, "key = value" lines,
// '#' or ';' comments.
inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line, section;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto body = detail::trim(line);
    if (body.empty() || body[0] == '#' || body[0] == ';') continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("config line " + std::to_string(n) + ": unterminated section header");
      section = std::string(detail::trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    if (section.empty()) throw ConfigError("config line " + std::to_string(n) + ": key outside a section");
    std::string value(detail::trim(body.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
      set_config_value(c, section + "." + std::string(detail::trim(body.substr(0, eq))), value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path), std::filesystem::path(path).parent_path());
}

}  // namespace crystalign
