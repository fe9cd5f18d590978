#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cohort/prompting.hpp"
#include "cohort/schema.hpp"

namespace cohort {

struct LlmResponse {
  std::string text;
  int attempts = 1;        // transport attempts a real backend needed
  bool from_cache = false;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual LlmResponse complete(const Prompt& prompt) = 0;
  // Distinguishes backends/settings whose answers must not share cache
  // entries.
  virtual std::string cache_identity() const = 0;
};

// "the disease indices are: (4, 7, 10)" — the declaration both exemplar
// answers and model answers are expected to end with.
std::string format_label_declaration(const LabelSet& labels);

// Extracts the label set from a model answer: the parenthesized integer list
// after the LAST occurrence of the declaration phrase (case-insensitive);
// if that fails, the last parenthesized comma-separated integer list
// anywhere. Out-of-range indices are dropped with a warning on stderr, and
// exclusivity violations are repaired (only the lowest exclusive label
// survives). Throws AnswerParseError when no list can be extracted.
LabelSet parse_labels(const std::string& answer, const LabelSchema& schema);
std::optional<LabelSet> try_parse_labels(const std::string& answer,
                                         const LabelSchema& schema);

// On-disk response cache, one JSON file per request hash. Off unless a
// directory is configured.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir);

  static std::uint64_t key_of(const std::string& identity,
                              const std::string& prompt_text);
  std::optional<std::string> lookup(std::uint64_t key) const;
  void store(std::uint64_t key, const std::string& response_text) const;

 private:
  std::filesystem::path dir_;
};

class CachingLlmClient final : public LlmClient {
 public:
  CachingLlmClient(LlmClient& inner, CompletionCache cache)
      : inner_(inner), cache_(std::move(cache)) {}

  LlmResponse complete(const Prompt& prompt) override;
  std::string cache_identity() const override {
    return inner_.cache_identity();
  }

 private:
  LlmClient& inner_;
  CompletionCache cache_;
};

}  // namespace cohort
