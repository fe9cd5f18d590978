#include "cohort/llm.hpp"

#include <cctype>
#include <chrono>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"
#include "cohort/rng.hpp"

namespace cohort {

namespace {

constexpr const char* kDeclarationPhrase = "the disease indices are";

std::string to_lower(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Parses "( 4 , 7 ,10 )" starting at the '(' at `open`. Returns the numbers,
// or nullopt if the group is not a pure integer list.
std::optional<std::vector<int>> parse_int_group(const std::string& text,
                                                std::size_t open) {
  std::vector<int> values;
  std::size_t i = open + 1;
  bool expecting_value = true;
  std::string digits;
  // Flushes the pending number; false means the group is malformed.
  auto flush = [&]() -> bool {
    if (digits.empty()) return true;
    if (digits == "-") return false;      // a sign with no digits
    if (digits.size() > 9) return false;  // avoids int overflow; not a label
    values.push_back(std::stoi(digits));
    digits.clear();
    expecting_value = false;
    return true;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ')') {
      if (!flush()) return std::nullopt;
      if (expecting_value || values.empty()) return std::nullopt;
      return values;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!flush()) return std::nullopt;
      continue;
    }
    if (c == ',') {
      if (!flush()) return std::nullopt;
      if (expecting_value) return std::nullopt;  // ",," or "(,"
      expecting_value = true;
      continue;
    }
    if (c == '-' && digits.empty() && expecting_value) {
      digits.push_back(c);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (!expecting_value) return std::nullopt;  // two numbers, no comma
      digits.push_back(c);
      continue;
    }
    return std::nullopt;  // any other character disqualifies the group
  }
  return std::nullopt;  // unterminated
}

// The last parseable integer group at or after `from`.
std::optional<std::vector<int>> last_int_group(const std::string& text,
                                               std::size_t from) {
  std::optional<std::vector<int>> found;
  for (std::size_t pos = from; pos < text.size(); ++pos) {
    if (text[pos] != '(') continue;
    if (auto group = parse_int_group(text, pos)) found = std::move(group);
  }
  return found;
}

LabelSet finalize_labels(const std::vector<int>& values,
                         const LabelSchema& schema) {
  LabelSet labels;
  for (int v : values) {
    if (!schema.valid_index(v)) {
      std::cerr << "warning: dropping out-of-range label index " << v
                << " from model answer\n";
      continue;
    }
    labels.insert(v);
  }
  return schema.repair_exclusivity(labels);
}

}  // namespace

std::string format_label_declaration(const LabelSet& labels) {
  return std::string(kDeclarationPhrase) + ": " + labels.to_parenthesized();
}

LabelSet parse_labels(const std::string& answer, const LabelSchema& schema) {
  const std::string lower = to_lower(answer);
  const std::string phrase = kDeclarationPhrase;
  std::size_t last_phrase = std::string::npos;
  std::size_t pos = 0;
  while ((pos = lower.find(phrase, pos)) != std::string::npos) {
    last_phrase = pos;
    pos += phrase.size();
  }
  if (last_phrase != std::string::npos) {
    if (auto group = last_int_group(answer, last_phrase + phrase.size())) {
      return finalize_labels(*group, schema);
    }
  }
  if (auto group = last_int_group(answer, 0)) {
    return finalize_labels(*group, schema);
  }
  throw AnswerParseError("no label list found in model answer");
}

std::optional<LabelSet> try_parse_labels(const std::string& answer,
                                         const LabelSchema& schema) {
  try {
    return parse_labels(answer, schema);
  } catch (const AnswerParseError&) {
    return std::nullopt;
  }
}

CompletionCache::CompletionCache(std::filesystem::path dir)
    : dir_(std::move(dir)) {
  if (dir_.empty()) throw ValidationError("cache directory must be non-empty");
  std::filesystem::create_directories(dir_);
}

std::uint64_t CompletionCache::key_of(const std::string& identity,
                                      const std::string& prompt_text) {
  return fnv1a64(identity + '\x1f' + prompt_text);
}

namespace {

std::string hex_key(std::uint64_t key) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << key;
  return out.str();
}

}  // namespace

std::optional<std::string> CompletionCache::lookup(std::uint64_t key) const {
  const auto path = dir_ / (hex_key(key) + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  const nlohmann::json doc = read_json_file(path);
  if (!doc.contains("response_text")) {
    throw ValidationError(path.string() + ": cache entry is malformed");
  }
  return doc["response_text"].get<std::string>();
}

void CompletionCache::store(std::uint64_t key,
                            const std::string& response_text) const {
  nlohmann::json doc;
  doc["request_hash"] = hex_key(key);
  doc["response_text"] = response_text;
  doc["timestamp"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  write_json_file(dir_ / (hex_key(key) + ".json"), doc);
}

LlmResponse CachingLlmClient::complete(const Prompt& prompt) {
  const std::uint64_t key =
      CompletionCache::key_of(inner_.cache_identity(), prompt.text);
  if (auto hit = cache_.lookup(key)) {
    LlmResponse response;
    response.text = std::move(*hit);
    response.attempts = 0;
    response.from_cache = true;
    return response;
  }
  LlmResponse response = inner_.complete(prompt);
  cache_.store(key, response.text);
  return response;
}

}  // namespace cohort
