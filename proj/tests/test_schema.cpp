#include "cohort/schema.hpp"

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "doctest.h"
#include "support/synthetic.hpp"

using namespace cohort;

TEST_CASE("LabelSet stays sorted and unique") {
  LabelSet set{7, 4, 10, 4};
  CHECK(set.indices() == std::vector<int>{4, 7, 10});
  set.insert(1);
  set.insert(7);
  CHECK(set.indices() == std::vector<int>{1, 4, 7, 10});
  set.erase(4);
  CHECK(set.indices() == std::vector<int>{1, 7, 10});
  CHECK(set.contains(7));
  CHECK_FALSE(set.contains(4));
  CHECK(set.size() == 3);
  CHECK_FALSE(set.empty());
  CHECK(LabelSet{}.empty());
}

TEST_CASE("LabelSet set algebra") {
  const LabelSet a{4, 7, 10, 13, 17};
  const LabelSet b{4, 7, 10};
  CHECK(LabelSet::intersection_size(a, b) == 3);
  CHECK(LabelSet::symmetric_difference_size(a, b) == 2);
  CHECK(LabelSet::intersection_size(a, LabelSet{}) == 0);
  CHECK(LabelSet::symmetric_difference_size(a, LabelSet{}) == 5);
  CHECK(LabelSet::symmetric_difference_size(a, a) == 0);
}

TEST_CASE("LabelSet renders the parenthesized list") {
  CHECK(LabelSet{4, 7, 10}.to_parenthesized() == "(4, 7, 10)");
  CHECK(LabelSet{1}.to_parenthesized() == "(1)");
  CHECK(LabelSet{}.to_parenthesized() == "()");
}

TEST_CASE("the bundled schema loads with 20 labels and two exclusive ones") {
  const LabelSchema schema = testing::bundled_schema();
  CHECK(schema.count() == 20);
  CHECK(schema.name(1) == "normal");
  CHECK(schema.name(2) == "Cardiomegaly");
  CHECK(schema.name(8) == "hernia hiatal");
  CHECK(schema.name(20) == "other findings");
  CHECK(schema.exclusive_indices() == std::vector<int>{1, 20});
  CHECK(schema.is_exclusive(1));
  CHECK(schema.is_exclusive(20));
  CHECK_FALSE(schema.is_exclusive(5));
  CHECK(schema.valid_index(1));
  CHECK(schema.valid_index(20));
  CHECK_FALSE(schema.valid_index(0));
  CHECK_FALSE(schema.valid_index(21));
}

TEST_CASE("schema round-trips through JSON") {
  const LabelSchema schema = testing::bundled_schema();
  const LabelSchema again = LabelSchema::from_json(schema.to_json());
  CHECK(again.count() == schema.count());
  CHECK(again.names() == schema.names());
  CHECK(again.exclusive_indices() == schema.exclusive_indices());
}

TEST_CASE("validate_label_set enforces range and exclusivity") {
  const LabelSchema schema = testing::bundled_schema();
  CHECK_NOTHROW(schema.validate_label_set(LabelSet{4, 7, 10}));
  CHECK_NOTHROW(schema.validate_label_set(LabelSet{1}));
  CHECK_NOTHROW(schema.validate_label_set(LabelSet{20}));
  CHECK_NOTHROW(schema.validate_label_set(LabelSet{}));
  CHECK_THROWS_AS(schema.validate_label_set(LabelSet{0}), ValidationError);
  CHECK_THROWS_AS(schema.validate_label_set(LabelSet{21}), ValidationError);
  CHECK_THROWS_AS(schema.validate_label_set(LabelSet{1, 5}), ValidationError);
  CHECK_THROWS_AS(schema.validate_label_set(LabelSet{5, 20}), ValidationError);
  CHECK_THROWS_AS(schema.validate_label_set(LabelSet{1, 20}), ValidationError);
  // Exclusivity checks can be turned off for raw model output.
  CHECK_NOTHROW(schema.validate_label_set(LabelSet{1, 5}, false));
}

TEST_CASE("repair_exclusivity keeps the lowest exclusive label") {
  const LabelSchema schema = testing::bundled_schema();
  CHECK(schema.repair_exclusivity(LabelSet{1, 5, 9}) == LabelSet{1});
  CHECK(schema.repair_exclusivity(LabelSet{5, 20}) == LabelSet{20});
  CHECK(schema.repair_exclusivity(LabelSet{1, 20}) == LabelSet{1});
  CHECK(schema.repair_exclusivity(LabelSet{4, 7}) == LabelSet{4, 7});
  CHECK(schema.repair_exclusivity(LabelSet{1}) == LabelSet{1});
  CHECK(schema.repair_exclusivity(LabelSet{}) == LabelSet{});
}

TEST_CASE("schema JSON must be contiguous and one-based") {
  nlohmann::json doc = {
      {"labels",
       {{{"index", 1}, {"name", "alpha"}}, {{"index", 3}, {"name", "gamma"}}}},
      {"exclusive_indices", nlohmann::json::array()}};
  CHECK_THROWS_AS(LabelSchema::from_json(doc), ValidationError);

  nlohmann::json bad_exclusive = {
      {"labels",
       {{{"index", 1}, {"name", "alpha"}}, {{"index", 2}, {"name", "beta"}}}},
      {"exclusive_indices", {5}}};
  CHECK_THROWS_AS(LabelSchema::from_json(bad_exclusive), ValidationError);

  nlohmann::json good = {
      {"labels",
       {{{"index", 1}, {"name", "alpha"}}, {{"index", 2}, {"name", "beta"}}}},
      {"exclusive_indices", {1}}};
  const LabelSchema schema = LabelSchema::from_json(good);
  CHECK(schema.count() == 2);
  CHECK(schema.name(2) == "beta");
}
