#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace cohort {

using Vec = Eigen::VectorXd;

// Hashed bag of words: lowercase, split on non-alphanumeric bytes, FNV-1a
// each token into one of `dim` buckets, count, L2-normalize. Deterministic
// across platforms; a text with no tokens maps to the zero vector.
Vec hashed_embedding(std::string_view text, int dim);

// Precomputed id -> vector table loaded from JSONL records
// {"id": ..., "vector": [...]}. All vectors must share one dimension.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::filesystem::path& path);

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.contains(id); }
  // Throws ValidationError for unknown ids.
  const Vec& lookup(const std::string& id) const;

 private:
  int dim_ = 0;
  std::map<std::string, Vec> vectors_;
};

struct EmbedderConfig {
  enum class Backend { kHashed, kFile };
  Backend backend = Backend::kHashed;
  int dim = 256;               // hashed backend only
  std::string table_path;      // file backend only
};

// Uniform interface over both backends. `key` is the report/sample id (used
// by the table backend); `text` is what the hashed backend digests.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual Vec embed(const std::string& key, const std::string& text) const = 0;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace cohort
