#pragma once

#include <functional>

#include "cohort/dataset.hpp"
#include "cohort/embedding.hpp"
#include "cohort/llm.hpp"
#include "cohort/policy.hpp"
#include "cohort/prompting.hpp"

namespace cohort {

struct TrainResult {
  PolicyParams params;
  TrainHistory history;
};

// Called after every finished epoch, so callers can persist history
// incrementally; if the model backend fails mid-training the records already
// sunk describe every completed epoch.
using EpochSink = std::function<void(const EpochRecord&)>;

// REINFORCE over the training split: per report, sample a k-shot exemplar
// selection from the policy, query the model, score the parsed answer
// against ground truth, and ascend the reward-weighted log-probability
// gradient batch by batch. Answers that cannot be parsed score as an empty
// prediction. Model-client errors propagate to the caller after the sink has
// seen all completed epochs.
TrainResult train(const TrainConfig& train_config,
                  const RewardConfig& reward_config,
                  const Dataset& train_split, const CandidatePool& pool,
                  const std::string& kg_text, LlmClient& client,
                  const Embedder& embedder, const LabelSchema& schema,
                  const PromptTemplate& tmpl = PromptTemplate::defaults(),
                  const EpochSink& sink = {});

}  // namespace cohort
