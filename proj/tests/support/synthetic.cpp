#include "support/synthetic.hpp"

#include <stdexcept>

#include <stdlib.h>

#include <nlohmann/json.hpp>

#include "cohort/jsonl.hpp"
#include "cohort/llm.hpp"
#include "cohort/oracle.hpp"
#include "cohort/rng.hpp"

namespace cohort::testing {

std::filesystem::path fixtures_dir() {
  return std::filesystem::path(COHORT_FIXTURES_DIR);
}

LabelSchema bundled_schema() {
  return LabelSchema::load(fixtures_dir() / "iu_rr_schema.json");
}

const std::vector<std::vector<int>>& label_groups() {
  static const std::vector<std::vector<int>> groups = {
      {1},
      {2},
      {3},
      {4},
      {5, 6, 7},
      {8, 9},
      {10, 11, 12, 13, 14, 15, 16},
      {17, 18, 19},
      {20},
  };
  return groups;
}

namespace {

// Sentence frames that never use a label-name token, so the keyword itself is
// the only lexical overlap between a report and the exemplars of its group.
std::string keyword_sentence(const std::string& keyword, std::uint64_t pick) {
  switch (pick % 3) {
    case 0:
      return "The study demonstrates " + keyword + ".";
    case 1:
      return "There is evidence of " + keyword + " on the current exam.";
    default:
      return "Appearance is typical of " + keyword + ".";
  }
}

const std::vector<std::string>& filler_sentences() {
  static const std::vector<std::string> fillers = {
      "Comparison was obtained with the earlier exam.",
      "The patient was imaged upright in two projections.",
      "Technical quality is adequate for interpretation.",
      "Visualized soft tissues are unremarkable.",
      "No additional comment is offered regarding the upper abdomen.",
      "Support apparatus remains in stable position.",
  };
  return fillers;
}

// ~10% normal, ~10% other findings, the rest spread over the disease groups;
// disease reports carry one to three labels of one group.
LabelSet draw_label_set(SplitMix64& rng) {
  const auto& groups = label_groups();
  const double p = rng.next_double();
  std::size_t g;
  if (p < 0.1) {
    g = 0;
  } else if (p < 0.2) {
    g = groups.size() - 1;
  } else {
    g = 1 + static_cast<std::size_t>(rng.next_below(groups.size() - 2));
  }
  const std::vector<int>& group = groups[g];
  if (group.size() == 1) return LabelSet{group[0]};
  std::vector<int> shuffled = group;
  deterministic_shuffle(shuffled, rng);
  const auto take = static_cast<std::size_t>(
      1 + rng.next_below(std::min<std::uint64_t>(3, shuffled.size())));
  shuffled.resize(take);
  return LabelSet(std::move(shuffled));
}

std::string join_sentences(const std::vector<std::string>& sentences) {
  std::string text;
  for (const std::string& s : sentences) {
    if (!text.empty()) text += " ";
    text += s;
  }
  return text;
}

}  // namespace

Dataset make_reports(const LabelSchema& schema, int count, std::uint64_t seed,
                     const std::string& id_prefix) {
  const KeywordMap keywords = default_keyword_map(schema);
  Dataset dataset;
  SplitMix64 rng(derive_seed(seed, "synthetic-reports"));
  for (int i = 0; i < count; ++i) {
    Report report;
    report.id = id_prefix + std::to_string(i + 1);
    const LabelSet labels = draw_label_set(rng);
    std::vector<std::string> sentences;
    for (int l : labels.indices()) {
      sentences.push_back(keyword_sentence(keywords.at(l), rng.next()));
    }
    const auto& fillers = filler_sentences();
    const auto f1 = static_cast<std::size_t>(rng.next_below(fillers.size()));
    auto f2 = static_cast<std::size_t>(rng.next_below(fillers.size() - 1));
    if (f2 >= f1) ++f2;
    sentences.push_back(fillers[f1]);
    sentences.push_back(fillers[f2]);
    deterministic_shuffle(sentences, rng);
    report.text =
        join_sentences(sentences) + " Study reference " + report.id + ".";
    report.labels = labels;
    dataset.reports.push_back(std::move(report));
  }
  return dataset;
}

CandidatePool make_pool(const LabelSchema& schema, int count,
                        std::uint64_t seed) {
  const KeywordMap keywords = default_keyword_map(schema);
  const auto& groups = label_groups();
  CandidatePool pool;
  SplitMix64 rng(derive_seed(seed, "synthetic-pool"));
  for (int j = 0; j < count; ++j) {
    CotSample sample;
    sample.id = "p" + std::to_string(j + 1);
    const std::vector<int>& group = groups[static_cast<std::size_t>(j) %
                                           groups.size()];
    sample.labels = LabelSet(group);

    std::vector<std::string> sentences;
    for (int l : group) {
      sentences.push_back(keyword_sentence(keywords.at(l), rng.next()));
    }
    const auto& fillers = filler_sentences();
    sentences.push_back(
        fillers[static_cast<std::size_t>(rng.next_below(fillers.size()))]);
    deterministic_shuffle(sentences, rng);
    sample.question =
        join_sentences(sentences) + " Study reference " + sample.id + ".";

    std::string answer;
    for (int l : group) {
      answer += "The report mentions '" + keywords.at(l) +
                "', which indicates " + schema.name(l) + " (" +
                std::to_string(l) + "). ";
    }
    answer += "Therefore, the output is [" +
              format_label_declaration(sample.labels) + "].";
    sample.answer = std::move(answer);
    pool.samples.push_back(std::move(sample));
  }
  return pool;
}

void write_reports_jsonl(const std::filesystem::path& path,
                         const Dataset& dataset) {
  std::string text;
  for (const Report& report : dataset.reports) {
    nlohmann::json record{{"id", report.id}, {"text", report.text}};
    if (report.labels) record["labels"] = report.labels->indices();
    text += to_jsonl_record(record) + "\n";
  }
  write_text_file(path, text);
}

void write_pool_jsonl(const std::filesystem::path& path,
                      const CandidatePool& pool) {
  std::string text;
  for (const CotSample& sample : pool.samples) {
    text += to_jsonl_record({{"id", sample.id},
                             {"question", sample.question},
                             {"answer", sample.answer},
                             {"labels", sample.labels.indices()}}) +
            "\n";
  }
  write_text_file(path, text);
}

TempDir::TempDir() {
  std::string pattern =
      (std::filesystem::temp_directory_path() / "cohort-test-XXXXXX").string();
  std::vector<char> buffer(pattern.begin(), pattern.end());
  buffer.push_back('\0');
  if (mkdtemp(buffer.data()) == nullptr) {
    throw std::runtime_error("cannot create a scratch directory");
  }
  path_ = buffer.data();
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace cohort::testing
