#include "cohort/schema.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"

namespace cohort {

LabelSet::LabelSet(std::initializer_list<int> indices)
    : LabelSet(std::vector<int>(indices)) {}

LabelSet::LabelSet(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()),
                 indices_.end());
}

void LabelSet::insert(int index) {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it == indices_.end() || *it != index) indices_.insert(it, index);
}

void LabelSet::erase(int index) {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it != indices_.end() && *it == index) indices_.erase(it);
}

bool LabelSet::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

int LabelSet::intersection_size(const LabelSet& a, const LabelSet& b) {
  int n = 0;
  auto ia = a.indices_.begin();
  auto ib = b.indices_.begin();
  while (ia != a.indices_.end() && ib != b.indices_.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

int LabelSet::symmetric_difference_size(const LabelSet& a, const LabelSet& b) {
  return static_cast<int>(a.size()) + static_cast<int>(b.size()) -
         2 * intersection_size(a, b);
}

std::string LabelSet::to_parenthesized() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i > 0) out << ", ";
    out << indices_[i];
  }
  out << ')';
  return out.str();
}

LabelSchema::LabelSchema(std::vector<std::string> names,
                         std::vector<int> exclusive)
    : names_(std::move(names)), exclusive_(std::move(exclusive)) {
  std::sort(exclusive_.begin(), exclusive_.end());
  for (int index : exclusive_) {
    if (!valid_index(index)) {
      throw ValidationError("exclusive index " + std::to_string(index) +
                            " is outside the label range 1.." +
                            std::to_string(count()));
    }
  }
}

LabelSchema LabelSchema::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("labels") ||
      !doc["labels"].is_array()) {
    throw ValidationError("label schema must be {\"labels\": [...]}");
  }
  std::vector<std::string> names;
  int expected = 1;
  for (const auto& entry : doc["labels"]) {
    if (!entry.is_object() || !entry.contains("index") ||
        !entry.contains("name")) {
      throw ValidationError(
          "each schema label needs an \"index\" and a \"name\"");
    }
    const int index = entry["index"].get<int>();
    if (index != expected) {
      throw ValidationError("schema label indices must be contiguous from 1; "
                            "expected " +
                            std::to_string(expected) + ", found " +
                            std::to_string(index));
    }
    names.push_back(entry["name"].get<std::string>());
    ++expected;
  }
  if (names.empty()) throw ValidationError("label schema is empty");
  std::vector<int> exclusive;
  if (doc.contains("exclusive_indices")) {
    exclusive = doc["exclusive_indices"].get<std::vector<int>>();
  }
  return LabelSchema(std::move(names), std::move(exclusive));
}

LabelSchema LabelSchema::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

const std::string& LabelSchema::name(int index) const {
  if (!valid_index(index)) {
    throw ValidationError("label index " + std::to_string(index) +
                          " is outside the label range 1.." +
                          std::to_string(count()));
  }
  return names_[static_cast<std::size_t>(index - 1)];
}

bool LabelSchema::is_exclusive(int index) const {
  return std::binary_search(exclusive_.begin(), exclusive_.end(), index);
}

void LabelSchema::validate_label_set(const LabelSet& labels,
                                     bool enforce_exclusivity) const {
  for (int index : labels.indices()) {
    if (!valid_index(index)) {
      throw ValidationError("label index " + std::to_string(index) +
                            " is outside the label range 1.." +
                            std::to_string(count()));
    }
  }
  if (enforce_exclusivity && labels.size() > 1) {
    for (int index : labels.indices()) {
      if (is_exclusive(index)) {
        throw ValidationError("label " + std::to_string(index) + " ('" +
                              name(index) +
                              "') is exclusive and cannot be combined with "
                              "other labels");
      }
    }
  }
}

LabelSet LabelSchema::repair_exclusivity(const LabelSet& labels) const {
  if (labels.size() <= 1) return labels;
  for (int index : labels.indices()) {  // indices are sorted ascending
    if (is_exclusive(index)) return LabelSet{index};
  }
  return labels;
}

nlohmann::json LabelSchema::to_json() const {
  nlohmann::json doc;
  doc["labels"] = nlohmann::json::array();
  for (int i = 1; i <= count(); ++i) {
    doc["labels"].push_back({{"index", i}, {"name", name(i)}});
  }
  doc["exclusive_indices"] = exclusive_;
  return doc;
}

}  // namespace cohort
