#include "cohort/dataset.hpp"

#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"
#include "cohort/rng.hpp"

namespace cohort {

namespace {

std::string trim_copy(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

}  // namespace

std::string build_report_text(const std::string& findings,
                              const std::string& impression) {
  const std::string left = trim_copy(findings);
  const std::string right = trim_copy(impression);
  if (left.empty()) return right;
  if (right.empty()) return left;
  return left + " " + right;
}

Dataset load_reports(const std::filesystem::path& path,
                     const LabelSchema& schema) {
  Dataset dataset;
  std::unordered_set<std::string> seen_ids;
  for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    const std::string where = path.string() + ":" + std::to_string(line);
    if (!record.is_object() || !record.contains("id")) {
      throw ValidationError(where + ": report record needs an \"id\"");
    }
    Report report;
    report.id = record["id"].get<std::string>();
    if (!seen_ids.insert(report.id).second) {
      throw ValidationError(where + ": duplicate report id '" + report.id +
                            "'");
    }
    if (record.contains("text")) {
      report.text = record["text"].get<std::string>();
    } else if (record.contains("findings") || record.contains("impression")) {
      report.text =
          build_report_text(record.value("findings", std::string{}),
                            record.value("impression", std::string{}));
    } else {
      throw ValidationError(where +
                            ": report record needs \"text\" or "
                            "\"findings\"/\"impression\"");
    }
    if (report.text.empty()) {
      throw ValidationError(where + ": report '" + report.id +
                            "' has empty text");
    }
    if (record.contains("labels") && !record["labels"].is_null()) {
      LabelSet labels(record["labels"].get<std::vector<int>>());
      try {
        schema.validate_label_set(labels);
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
      report.labels = std::move(labels);
    }
    dataset.reports.push_back(std::move(report));
  });
  return dataset;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          int train_count,
                                          std::uint64_t seed) {
  const int n = static_cast<int>(dataset.size());
  if (train_count < 0 || train_count > n) {
    throw ValidationError("train_count " + std::to_string(train_count) +
                          " is outside [0, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(derive_seed(seed, "dataset-split"));
  deterministic_shuffle(order, rng);

  Dataset train;
  train.split = SplitTag::kTrain;
  Dataset test;
  test.split = SplitTag::kTest;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = (static_cast<int>(i) < train_count) ? train : test;
    dst.reports.push_back(dataset.reports[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace cohort
