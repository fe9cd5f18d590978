#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cohort/dataset.hpp"
#include "cohort/policy.hpp"
#include "cohort/schema.hpp"

namespace cohort {

// A fully assembled request: the structured parts plus the rendered text
// that is actually sent to the model. Clients that simulate the model reason
// over the structured parts; transport clients send `text`.
struct Prompt {
  std::string instruction;
  std::string kg_text;
  std::vector<std::string> cot_blocks;
  std::string query;  // raw report text
  std::string text;   // rendered prompt
};

// "Q<n>:\nBelow is the medical report: [<question>]\n\nA<n>:\n<answer>"
// Ordinals are 1-based.
std::string format_cot_sample(const CotSample& sample, int ordinal);

// Task statement: the numbered label inventory followed by the
// classification instruction and the answer-format directive.
std::string make_instruction(const LabelSchema& schema);

// Layout with {instruction}, {kg}, {cot} and {query} placeholders. After
// substitution, runs of three or more newlines collapse to a blank line (so
// an empty knowledge-graph or exemplar section leaves no hole) and outer
// whitespace is trimmed.
struct PromptTemplate {
  std::string layout;

  static PromptTemplate defaults();
  // Reads a layout from a file; it must mention {query}.
  static PromptTemplate load(const std::filesystem::path& path);
};

Prompt build_prompt(const LabelSchema& schema, const std::string& kg_text,
                    const std::vector<CotSample>& exemplars,
                    const Report& report,
                    const PromptTemplate& tmpl = PromptTemplate::defaults());

}  // namespace cohort
