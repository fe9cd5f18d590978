#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cohort/dataset.hpp"
#include "cohort/policy.hpp"
#include "cohort/schema.hpp"

namespace cohort::testing {

// Directory holding the repository's bundled fixtures (set by the build).
std::filesystem::path fixtures_dir();

// The bundled 20-label chest-radiograph schema.
LabelSchema bundled_schema();

// The disease-system grouping of that label space, mirroring the bundled
// knowledge graph's clusters.
const std::vector<std::vector<int>>& label_groups();

// Deterministic synthetic reports: each carries labels from one disease
// group, announced by one keyword sentence per label amid neutral filler, so
// the label signal is recoverable from the text alone. Texts are unique.
Dataset make_reports(const LabelSchema& schema, int count, std::uint64_t seed,
                     const std::string& id_prefix = "r");

// Deterministic exemplar pool: sample j covers group j % group-count and its
// answer asserts every label of that group, ending in a parseable label
// declaration.
CandidatePool make_pool(const LabelSchema& schema, int count,
                        std::uint64_t seed);

// Loader-compatible JSONL writers.
void write_reports_jsonl(const std::filesystem::path& path,
                         const Dataset& dataset);
void write_pool_jsonl(const std::filesystem::path& path,
                      const CandidatePool& pool);

// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace cohort::testing
