#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "crystalign/harness/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a deterministic synthetic JSON-lines sample batch"};
  std::size_t prompts = 64, per_prompt = 16;
  std::uint64_t seed = 1;
  std::string out;
  app.add_option("--prompts", prompts, "Number of prompts");
  app.add_option("--per-prompt", per_prompt, "Samples per prompt");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out, "Output file (default: stdout)");
  CLI11_PARSE(app, argc, argv);

  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary | std::ios::trunc);
    if (!file) {
      std::cerr << "cannot write " << out << "\n";
      return 2;
    }
  }
  std::ostream& os = out.empty() ? std::cout : file;
  for (const auto& r : crystalign::make_synthetic_samples(prompts, per_prompt, seed)) os << crystalign::to_jsonl(r) << "\n";
  return 0;
}
