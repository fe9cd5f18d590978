#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cohort/schema.hpp"

namespace cohort {

struct Report {
  std::string id;
  std::string text;
  std::optional<LabelSet> labels;  // absent for unlabeled inference inputs
};

enum class SplitTag { kUnsplit, kTrain, kTest };

struct Dataset {
  std::vector<Report> reports;
  SplitTag split = SplitTag::kUnsplit;

  std::size_t size() const { return reports.size(); }
};

// Joins the findings and impression sections into the single report text used
// everywhere downstream. Either part may be empty.
std::string build_report_text(const std::string& findings,
                              const std::string& impression);

// Loads a JSONL file of reports. Two record shapes are accepted:
//   {"id": ..., "text": ..., "labels": [...]}
//   {"id": ..., "findings": ..., "impression": ..., "labels": [...]}
// "labels" may be absent. Label indices are validated against the schema
// (range and exclusivity); duplicate ids are rejected.
Dataset load_reports(const std::filesystem::path& path,
                     const LabelSchema& schema);

// Deterministically splits into (train, test): shuffles a copy of the report
// order with a SplitMix64 stream seeded from `seed`, takes the first
// `train_count` for train and the rest for test. Throws ValidationError if
// train_count is not in [0, size].
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          int train_count,
                                          std::uint64_t seed);

}  // namespace cohort
