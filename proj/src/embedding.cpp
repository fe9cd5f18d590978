#include "cohort/embedding.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"
#include "cohort/rng.hpp"

namespace cohort {

Vec hashed_embedding(std::string_view text, int dim) {
  if (dim <= 0) throw ValidationError("embedding dim must be positive");
  Vec v = Vec::Zero(dim);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const auto bucket = fnv1a64(token) % static_cast<std::uint64_t>(dim);
    v[static_cast<Eigen::Index>(bucket)] += 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      token.push_back(
          static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  EmbeddingTable table;
  for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    const std::string where = path.string() + ":" + std::to_string(line);
    if (!record.contains("id") || !record.contains("vector") ||
        !record["vector"].is_array()) {
      throw ValidationError(where +
                            ": embedding record needs \"id\" and \"vector\"");
    }
    const std::string id = record["id"].get<std::string>();
    const auto values = record["vector"].get<std::vector<double>>();
    if (values.empty()) {
      throw ValidationError(where + ": empty vector for id '" + id + "'");
    }
    if (table.dim_ == 0) {
      table.dim_ = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != table.dim_) {
      throw ValidationError(where + ": vector for id '" + id + "' has " +
                            std::to_string(values.size()) +
                            " components, expected " +
                            std::to_string(table.dim_));
    }
    Vec v(table.dim_);
    for (int i = 0; i < table.dim_; ++i) v[i] = values[static_cast<std::size_t>(i)];
    if (!table.vectors_.emplace(id, std::move(v)).second) {
      throw ValidationError(where + ": duplicate embedding id '" + id + "'");
    }
  });
  if (table.vectors_.empty()) {
    throw ValidationError(path.string() + ": embedding table is empty");
  }
  return table;
}

const Vec& EmbeddingTable::lookup(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    throw ValidationError("no embedding for id '" + id + "'");
  }
  return it->second;
}

namespace {

class HashedEmbedder final : public Embedder {
 public:
  explicit HashedEmbedder(int dim) : dim_(dim) {
    if (dim <= 0) throw ValidationError("embedding dim must be positive");
  }
  int dim() const override { return dim_; }
  Vec embed(const std::string&, const std::string& text) const override {
    return hashed_embedding(text, dim_);
  }

 private:
  int dim_;
};

class TableEmbedder final : public Embedder {
 public:
  explicit TableEmbedder(EmbeddingTable table) : table_(std::move(table)) {}
  int dim() const override { return table_.dim(); }
  Vec embed(const std::string& key, const std::string&) const override {
    return table_.lookup(key);
  }

 private:
  EmbeddingTable table_;
};

}  // namespace

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  switch (config.backend) {
    case EmbedderConfig::Backend::kHashed:
      return std::make_unique<HashedEmbedder>(config.dim);
    case EmbedderConfig::Backend::kFile:
      if (config.table_path.empty()) {
        throw ValidationError(
            "embedding backend 'file' needs a table_path");
      }
      return std::make_unique<TableEmbedder>(
          EmbeddingTable::load(config.table_path));
  }
  throw ValidationError("invalid embedding backend");
}

}  // namespace cohort
