#include "cohort/prompting.hpp"

#include <sstream>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"

namespace cohort {

namespace {

constexpr const char* kDirective =
    "the output is [the disease indices are: "
    "(<comma-separated label indices>)].";

constexpr const char* kDefaultLayout =
    "{instruction}\n"
    "\n"
    "{kg}\n"
    "\n"
    "{cot}\n"
    "\n"
    "Test Sample:\n"
    "Below is the medical report: [{query}]\n"
    "\n"
    "End your answer with: the output is [the disease indices are: "
    "(<comma-separated label indices>)].";

void replace_all_occurrences(std::string& text, const std::string& needle,
                             const std::string& replacement) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), replacement);
    pos += replacement.size();
  }
}

// Collapse runs of 3+ newlines to a blank line, then trim outer whitespace.
std::string tidy(std::string text) {
  std::string out;
  out.reserve(text.size());
  int run = 0;
  for (char c : text) {
    if (c == '\n') {
      ++run;
      if (run <= 2) out.push_back(c);
    } else {
      run = 0;
      out.push_back(c);
    }
  }
  const auto first = out.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = out.find_last_not_of(" \t\r\n");
  return out.substr(first, last - first + 1);
}

}  // namespace

std::string format_cot_sample(const CotSample& sample, int ordinal) {
  if (ordinal <= 0) throw ValidationError("exemplar ordinal must be positive");
  std::ostringstream out;
  out << "Q" << ordinal << ":\nBelow is the medical report: ["
      << sample.question << "]\n\nA" << ordinal << ":\n" << sample.answer;
  return out.str();
}

std::string make_instruction(const LabelSchema& schema) {
  std::ostringstream out;
  out << "Below is a list of disease labels:\n";
  for (int i = 1; i <= schema.count(); ++i) {
    out << i << ". " << schema.name(i) << "\n";
  }
  out << "Classify the medical report into one or more of the disease labels "
         "above. Think step by step from the report sentences to the labels, "
         "then end your answer with: "
      << kDirective;
  return out.str();
}

PromptTemplate PromptTemplate::defaults() { return {kDefaultLayout}; }

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  PromptTemplate tmpl{read_text_file(path)};
  if (tmpl.layout.find("{query}") == std::string::npos) {
    throw ValidationError(path.string() +
                          ": prompt template must contain {query}");
  }
  return tmpl;
}

Prompt build_prompt(const LabelSchema& schema, const std::string& kg_text,
                    const std::vector<CotSample>& exemplars,
                    const Report& report, const PromptTemplate& tmpl) {
  Prompt prompt;
  prompt.instruction = make_instruction(schema);
  prompt.kg_text = kg_text;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    prompt.cot_blocks.push_back(
        format_cot_sample(exemplars[i], static_cast<int>(i) + 1));
  }
  prompt.query = report.text;

  std::string cot_joined;
  for (std::size_t i = 0; i < prompt.cot_blocks.size(); ++i) {
    if (i > 0) cot_joined += "\n\n";
    cot_joined += prompt.cot_blocks[i];
  }
  std::string text = tmpl.layout;
  replace_all_occurrences(text, "{instruction}", prompt.instruction);
  replace_all_occurrences(text, "{kg}", prompt.kg_text);
  replace_all_occurrences(text, "{cot}", cot_joined);
  replace_all_occurrences(text, "{query}", prompt.query);
  prompt.text = tidy(std::move(text));
  return prompt;
}

}  // namespace cohort
