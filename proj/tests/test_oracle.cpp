#include "cohort/oracle.hpp"

#include <string>
#include <vector>

#include "cohort/errors.hpp"
#include "cohort/prompting.hpp"
#include "doctest.h"
#include "support/synthetic.hpp"

using namespace cohort;

namespace {

Prompt prompt_for(const LabelSchema& schema, const std::string& report_text,
                  const std::vector<CotSample>& exemplars = {}) {
  Report report;
  report.id = "q";
  report.text = report_text;
  return build_prompt(schema, "", exemplars, report);
}

// An exemplar whose answer asserts exactly `labels`.
CotSample exemplar_for(const LabelSet& labels) {
  CotSample sample;
  sample.id = "e" + labels.to_parenthesized();
  sample.question = "An exemplar report.";
  sample.answer =
      "Reasoning. Therefore, the output is [" +
      format_label_declaration(labels) + "].";
  sample.labels = labels;
  return sample;
}

}  // namespace

TEST_CASE("keywords derive from schema names: before-slash, lowercased") {
  const LabelSchema schema = testing::bundled_schema();
  const KeywordMap keywords = default_keyword_map(schema);
  REQUIRE(keywords.size() == 20);
  CHECK(keywords.at(1) == "normal");
  CHECK(keywords.at(2) == "cardiomegaly");
  CHECK(keywords.at(8) == "hernia hiatal");
  // Names with slash-separated synonym lists keep only the first form.
  for (int i = 1; i <= schema.count(); ++i) {
    CHECK(keywords.at(i).find('/') == std::string::npos);
    for (char c : keywords.at(i)) {
      CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
    }
  }
}

TEST_CASE("identical requests produce identical answers") {
  const LabelSchema schema = testing::bundled_schema();
  const KeywordMap keywords = default_keyword_map(schema);
  OracleConfig config;
  config.seed = 7;
  const LabelSet truth{5, 10};
  const Prompt prompt = prompt_for(schema, "Some report text.");

  const LlmResponse a =
      simulate_response(config, prompt, truth, keywords, schema);
  const LlmResponse b =
      simulate_response(config, prompt, truth, keywords, schema);
  CHECK(a.text == b.text);

  // A different seed, query, or exemplar set changes the noise stream.
  OracleConfig other_seed = config;
  other_seed.seed = 8;
  const LlmResponse c =
      simulate_response(other_seed, prompt, truth, keywords, schema);
  const Prompt other_query = prompt_for(schema, "Different report text.");
  const LlmResponse d =
      simulate_response(config, other_query, truth, keywords, schema);
  const Prompt with_exemplar =
      prompt_for(schema, "Some report text.", {exemplar_for(LabelSet{2})});
  const LlmResponse e =
      simulate_response(config, with_exemplar, truth, keywords, schema);
  CHECK(a.text != c.text);
  CHECK(a.text != d.text);
  CHECK(a.text != e.text);
}

TEST_CASE("answers parse back to label sets and use the rationale format") {
  const LabelSchema schema = testing::bundled_schema();
  const KeywordMap keywords = default_keyword_map(schema);
  OracleConfig config;
  config.p_hit = 1.0;
  config.p_fp = 0.0;
  const LabelSet truth{5, 10};
  const Prompt prompt = prompt_for(schema, "Effusion and opacity seen.");

  const LlmResponse response =
      simulate_response(config, prompt, truth, keywords, schema);
  CHECK(parse_labels(response.text, schema) == truth);
  CHECK(response.text.find("', suggesting pleural effusion (5).\n") !=
        std::string::npos);
  CHECK(response.text.find("The report mentions '") != std::string::npos);
  const std::string tail = "Therefore, the output is [the disease indices "
                           "are: (5, 10)].";
  REQUIRE(response.text.size() >= tail.size());
  CHECK(response.text.substr(response.text.size() - tail.size()) == tail);
}

TEST_CASE("an empty assertion set falls back to the normal label") {
  const LabelSchema schema = testing::bundled_schema();
  const KeywordMap keywords = default_keyword_map(schema);
  OracleConfig config;
  config.p_hit = 0.0;  // never detect
  config.p_fp = 0.0;   // never hallucinate
  const LabelSet truth{5};
  const Prompt prompt = prompt_for(schema, "A report.");

  const LlmResponse response =
      simulate_response(config, prompt, truth, keywords, schema);
  CHECK(response.text.rfind("The report does not clearly mention any finding.",
                            0) == 0);
  CHECK(parse_labels(response.text, schema) == LabelSet{1});
}

TEST_CASE("relevant exemplars raise detection and damp false positives") {
  const LabelSchema schema = testing::bundled_schema();
  const KeywordMap keywords = default_keyword_map(schema);
  const LabelSet truth{5, 10};

  // With p_hit 0 and boost 0.5, two relevant exemplars force p_detect to 1;
  // irrelevant exemplars leave it at 0.
  OracleConfig config;
  config.p_hit = 0.0;
  config.p_fp = 0.0;
  config.boost = 0.5;

  const std::vector<CotSample> relevant{exemplar_for(LabelSet{5, 6}),
                                        exemplar_for(LabelSet{10})};
  const Prompt helped = prompt_for(schema, "Report body.", relevant);
  CHECK(parse_labels(
            simulate_response(config, helped, truth, keywords, schema).text,
            schema) == truth);

  const std::vector<CotSample> irrelevant{exemplar_for(LabelSet{2}),
                                          exemplar_for(LabelSet{3})};
  const Prompt unhelped = prompt_for(schema, "Report body.", irrelevant);
  CHECK(parse_labels(
            simulate_response(config, unhelped, truth, keywords, schema).text,
            schema) == LabelSet{1});  // nothing detected -> normal fallback

  // With p_fp 1 and boost 1, four relevant exemplars drive the false
  // positive rate to 0 while detection saturates at 1.
  OracleConfig fp_config;
  fp_config.p_hit = 1.0;
  fp_config.p_fp = 1.0;
  fp_config.boost = 1.0;
  const std::vector<CotSample> four{
      exemplar_for(LabelSet{5}), exemplar_for(LabelSet{5, 6}),
      exemplar_for(LabelSet{10}), exemplar_for(LabelSet{10, 11})};
  const Prompt saturated = prompt_for(schema, "Report body.", four);
  CHECK(parse_labels(
            simulate_response(fp_config, saturated, truth, keywords, schema)
                .text,
            schema) == truth);
}

TEST_CASE("probability knobs are validated") {
  const LabelSchema schema = testing::bundled_schema();
  const KeywordMap keywords = default_keyword_map(schema);
  const Prompt prompt = prompt_for(schema, "Text.");
  OracleConfig bad_hit;
  bad_hit.p_hit = 1.5;
  CHECK_THROWS_AS(
      simulate_response(bad_hit, prompt, LabelSet{5}, keywords, schema),
      ValidationError);
  OracleConfig bad_fp;
  bad_fp.p_fp = -0.1;
  CHECK_THROWS_AS(
      simulate_response(bad_fp, prompt, LabelSet{5}, keywords, schema),
      ValidationError);
  OracleConfig bad_boost;
  bad_boost.boost = -0.2;
  CHECK_THROWS_AS(
      simulate_response(bad_boost, prompt, LabelSet{5}, keywords, schema),
      ValidationError);
}

TEST_CASE("the simulated client resolves truth by query text") {
  const LabelSchema schema = testing::bundled_schema();
  SimulatedLlmClient client({1.0, 0.0, 0.2, 3}, schema,
                            default_keyword_map(schema));
  client.register_truth("Report alpha.", LabelSet{4});
  client.register_truth("Report beta.", LabelSet{17, 18});
  // Re-registering with the same labels is fine; conflicting labels are not.
  client.register_truth("Report alpha.", LabelSet{4});
  CHECK_THROWS_AS(client.register_truth("Report alpha.", LabelSet{5}),
                  ValidationError);

  const Prompt alpha = prompt_for(schema, "Report alpha.");
  CHECK(parse_labels(client.complete(alpha).text, schema) == LabelSet{4});
  const Prompt unknown = prompt_for(schema, "Never registered.");
  CHECK_THROWS_AS(client.complete(unknown), ValidationError);

  // register_dataset covers labeled reports and skips unlabeled ones.
  Dataset dataset = testing::make_reports(schema, 4, 11);
  dataset.reports[2].labels.reset();
  SimulatedLlmClient bulk({1.0, 0.0, 0.2, 3}, schema,
                          default_keyword_map(schema));
  bulk.register_dataset(dataset);
  const Prompt known = prompt_for(schema, dataset.reports[0].text);
  CHECK(parse_labels(bulk.complete(known).text, schema) ==
        *dataset.reports[0].labels);
  const Prompt skipped = prompt_for(schema, dataset.reports[2].text);
  CHECK_THROWS_AS(bulk.complete(skipped), ValidationError);
}

TEST_CASE("the cache identity pins every oracle knob") {
  const LabelSchema schema = testing::bundled_schema();
  SimulatedLlmClient client({0.5, 0.05, 0.2, 42}, schema,
                            default_keyword_map(schema));
  CHECK(client.cache_identity() == "simulated:0.5:0.05:0.2:42");
}
