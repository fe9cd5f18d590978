#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cohort/dataset.hpp"
#include "cohort/llm.hpp"
#include "cohort/schema.hpp"

namespace cohort {

// Behavior knobs for the simulated model. Detection of a true label succeeds
// with probability min(1, p_hit + boost * R) and a false positive on an
// absent label fires with probability max(0, p_fp - boost * R / 2), where R
// is the number of in-prompt exemplars sharing at least one label with the
// report's ground truth — so prompts with relevant exemplars measurably help,
// which is the property the policy has to discover.
struct OracleConfig {
  double p_hit = 0.5;
  double p_fp = 0.05;
  double boost = 0.2;
  std::uint64_t seed = 0;
};

// label index -> the keyword the simulated rationale cites for it.
using KeywordMap = std::map<int, std::string>;

// Keyword per label derived from its schema name: the part before the first
// "/", trimmed and lowercased.
KeywordMap default_keyword_map(const LabelSchema& schema);

// Produces the simulated answer for one prompt given the report's ground
// truth. Fully deterministic in (config.seed, prompt.query, prompt
// exemplars): repeated identical requests return identical text.
LlmResponse simulate_response(const OracleConfig& config, const Prompt& prompt,
                              const LabelSet& truth, const KeywordMap& keywords,
                              const LabelSchema& schema);

// LlmClient over simulate_response. Ground truth is registered up front and
// found again by the prompt's query text.
class SimulatedLlmClient final : public LlmClient {
 public:
  SimulatedLlmClient(OracleConfig config, LabelSchema schema,
                     KeywordMap keywords);

  // Throws ValidationError on a conflicting duplicate text.
  void register_truth(const std::string& report_text, const LabelSet& labels);
  // Registers every labeled report of the dataset.
  void register_dataset(const Dataset& dataset);

  LlmResponse complete(const Prompt& prompt) override;
  std::string cache_identity() const override;

 private:
  OracleConfig config_;
  LabelSchema schema_;
  KeywordMap keywords_;
  std::map<std::string, LabelSet> truth_by_text_;
};

}  // namespace cohort
