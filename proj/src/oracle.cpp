#include "cohort/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cohort/errors.hpp"
#include "cohort/rng.hpp"

namespace cohort {

namespace {

std::string keyword_from_name(const std::string& name) {
  std::string part = name.substr(0, name.find('/'));
  const auto first = part.find_first_not_of(" \t");
  const auto last = part.find_last_not_of(" \t");
  if (first == std::string::npos) return "";
  part = part.substr(first, last - first + 1);
  for (char& c : part) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return part;
}

void check_probability(double value, const char* what) {
  if (value < 0.0 || value > 1.0) {
    throw ValidationError(std::string(what) + " must be within [0, 1]");
  }
}

}  // namespace

KeywordMap default_keyword_map(const LabelSchema& schema) {
  KeywordMap keywords;
  for (int i = 1; i <= schema.count(); ++i) {
    keywords[i] = keyword_from_name(schema.name(i));
  }
  return keywords;
}

LlmResponse simulate_response(const OracleConfig& config, const Prompt& prompt,
                              const LabelSet& truth, const KeywordMap& keywords,
                              const LabelSchema& schema) {
  check_probability(config.p_hit, "oracle p_hit");
  check_probability(config.p_fp, "oracle p_fp");
  if (config.boost < 0.0) {
    throw ValidationError("oracle boost must be non-negative");
  }

  // R = how many exemplars in the prompt assert a label the report truly has.
  int relevant = 0;
  for (const std::string& block : prompt.cot_blocks) {
    if (auto asserted = try_parse_labels(block, schema)) {
      if (LabelSet::intersection_size(*asserted, truth) > 0) ++relevant;
    }
  }
  const double p_detect =
      std::min(1.0, config.p_hit + config.boost * relevant);
  const double p_fp =
      std::max(0.0, config.p_fp - config.boost * relevant / 2.0);

  // The stream depends on the query and the exemplar blocks, so the same
  // report with a different prompt gets fresh (but reproducible) noise.
  std::uint64_t state = derive_seed(config.seed, "oracle-response");
  state = derive_seed(state, "query", fnv1a64(prompt.query));
  for (const std::string& block : prompt.cot_blocks) {
    state = derive_seed(state, "cot", fnv1a64(block));
  }
  SplitMix64 rng(state);

  LabelSet asserted;
  for (int l = 1; l <= schema.count(); ++l) {
    const double draw = rng.next_double();  // exactly one draw per label
    if (truth.contains(l)) {
      if (draw < p_detect) asserted.insert(l);
    } else {
      if (draw < p_fp) asserted.insert(l);
    }
  }
  asserted = schema.repair_exclusivity(asserted);

  std::ostringstream out;
  if (asserted.empty()) {
    out << "The report does not clearly mention any finding.\n";
    asserted.insert(1);
  } else {
    for (int l : asserted.indices()) {
      const auto it = keywords.find(l);
      const std::string keyword =
          (it != keywords.end() && !it->second.empty()) ? it->second
                                                        : schema.name(l);
      out << "The report mentions '" << keyword << "', suggesting "
          << schema.name(l) << " (" << l << ").\n";
    }
  }
  out << "Therefore, the output is [" << format_label_declaration(asserted)
      << "].";

  LlmResponse response;
  response.text = out.str();
  return response;
}

SimulatedLlmClient::SimulatedLlmClient(OracleConfig config, LabelSchema schema,
                                       KeywordMap keywords)
    : config_(config),
      schema_(std::move(schema)),
      keywords_(std::move(keywords)) {}

void SimulatedLlmClient::register_truth(const std::string& report_text,
                                        const LabelSet& labels) {
  auto [it, inserted] = truth_by_text_.emplace(report_text, labels);
  if (!inserted && !(it->second == labels)) {
    throw ValidationError(
        "two reports with identical text but different labels cannot both "
        "be simulated");
  }
}

void SimulatedLlmClient::register_dataset(const Dataset& dataset) {
  for (const Report& report : dataset.reports) {
    if (report.labels) register_truth(report.text, *report.labels);
  }
}

LlmResponse SimulatedLlmClient::complete(const Prompt& prompt) {
  const auto it = truth_by_text_.find(prompt.query);
  if (it == truth_by_text_.end()) {
    throw ValidationError(
        "simulated backend has no ground truth for the queried report");
  }
  return simulate_response(config_, prompt, it->second, keywords_, schema_);
}

std::string SimulatedLlmClient::cache_identity() const {
  std::ostringstream out;
  out << "simulated:" << config_.p_hit << ':' << config_.p_fp << ':'
      << config_.boost << ':' << config_.seed;
  return out.str();
}

}  // namespace cohort
