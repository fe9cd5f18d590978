#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cohort {

// A set of 1-based label indices, kept sorted and unique.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<int> indices);
  explicit LabelSet(std::vector<int> indices);

  void insert(int index);
  void erase(int index);
  bool contains(int index) const;
  bool empty() const { return indices_.empty(); }
  std::size_t size() const { return indices_.size(); }
  const std::vector<int>& indices() const { return indices_; }

  // |a ∩ b|, |a △ b|.
  static int intersection_size(const LabelSet& a, const LabelSet& b);
  static int symmetric_difference_size(const LabelSet& a, const LabelSet& b);

  // Renders as "(4, 7, 10)" — the list syntax used in prompts and answers.
  std::string to_parenthesized() const;

  bool operator==(const LabelSet& other) const = default;

 private:
  std::vector<int> indices_;
};

// The label inventory: 1-based contiguous indices, a display name each, and
// the subset of indices that are exclusive (a report carrying one of them
// carries no other label).
class LabelSchema {
 public:
  LabelSchema() = default;
  LabelSchema(std::vector<std::string> names, std::vector<int> exclusive);

  static LabelSchema from_json(const nlohmann::json& doc);
  static LabelSchema load(const std::filesystem::path& path);

  int count() const { return static_cast<int>(names_.size()); }
  bool valid_index(int index) const {
    return index >= 1 && index <= count();
  }
  const std::string& name(int index) const;
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& exclusive_indices() const { return exclusive_; }
  bool is_exclusive(int index) const;

  // Throws ValidationError if any index is out of range, or (when
  // enforce_exclusivity) an exclusive label is combined with any other.
  void validate_label_set(const LabelSet& labels,
                          bool enforce_exclusivity = true) const;

  // If an exclusive label appears alongside other labels, keeps only the
  // lowest exclusive index present; otherwise returns the set unchanged.
  LabelSet repair_exclusivity(const LabelSet& labels) const;

  nlohmann::json to_json() const;

 private:
  std::vector<std::string> names_;
  std::vector<int> exclusive_;
};

}  // namespace cohort
