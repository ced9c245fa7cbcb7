#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crystalign/core/error.hpp"
#include "json.hpp"

namespace crystalign {

// One generated response for one prompt, as read from a JSON-lines file.
struct SampleRecord {
  std::string prompt_id;
  std::string prompt_text;
  std::string response_text;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory
};

// Parses JSON-lines text: one object per non-blank line with string keys
// prompt_id, prompt_text and response_text. Order is preserved.
inline std::vector<SampleRecord> parse_samples(std::istream& in) {
  std::vector<SampleRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ParseErrorKind::BadJson, number, e.byte == 0 ? 1 : e.byte, "malformed JSON record");
    }
    if (!j.is_object()) throw ParseError(ParseErrorKind::BadJson, number, 1, "record is not a JSON object");
    SampleRecord r;
    r.line = number;
    for (auto [key, field] : {std::pair{"prompt_id", &r.prompt_id}, std::pair{"prompt_text", &r.prompt_text},
                              std::pair{"response_text", &r.response_text}}) {
      auto it = j.find(key);
      if (it == j.end()) throw ParseError(ParseErrorKind::MissingKey, number, 1, std::string("missing key '") + key + "'");
      if (!it->is_string())
        throw ParseError(ParseErrorKind::MissingKey, number, 1, std::string("key '") + key + "' is not a string");
      *field = it->get<std::string>();
    }
    if (r.prompt_id.empty()) throw ParseError(ParseErrorKind::BadValue, number, 1, "empty prompt_id");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SampleRecord> load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open samples file " + path);
  return parse_samples(in);
}

inline std::string to_jsonl(const SampleRecord& r) {
  nlohmann::json j{{"prompt_id", r.prompt_id}, {"prompt_text", r.prompt_text}, {"response_text", r.response_text}};
  return j.dump();
}

}  // namespace crystalign
