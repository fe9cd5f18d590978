#include "cohort/trainer.hpp"

#include <numeric>

#include "cohort/errors.hpp"

namespace cohort {

TrainResult train(const TrainConfig& train_config,
                  const RewardConfig& reward_config,
                  const Dataset& train_split, const CandidatePool& pool,
                  const std::string& kg_text, LlmClient& client,
                  const Embedder& embedder, const LabelSchema& schema,
                  const PromptTemplate& tmpl, const EpochSink& sink) {
  if (train_split.reports.empty()) {
    throw ValidationError("training split is empty");
  }
  if (train_config.epochs <= 0) {
    throw ValidationError("epochs must be positive");
  }
  if (train_config.batch_size <= 0) {
    throw ValidationError("batch_size must be positive");
  }
  if (train_config.k_shot <= 0) {
    throw ValidationError("k_shot must be positive");
  }
  if (train_config.sampling == SamplingMode::kWithoutReplacement &&
      static_cast<std::size_t>(train_config.k_shot) > pool.size()) {
    throw ValidationError("k_shot exceeds the pool size");
  }
  if (!pool.has_embeddings()) {
    throw ValidationError(
        "candidate pool has no embeddings; call compute_pool_embeddings");
  }
  for (const Report& report : train_split.reports) {
    if (!report.labels) {
      throw ValidationError("training report '" + report.id +
                            "' has no labels");
    }
  }

  PolicyParams params =
      PolicyParams::init(train_config.hidden_dim, embedder.dim(),
                         derive_seed(train_config.seed, "policy"));

  // Query embeddings are reused every epoch.
  std::vector<Vec> query_embeddings;
  query_embeddings.reserve(train_split.reports.size());
  for (const Report& report : train_split.reports) {
    query_embeddings.push_back(embedder.embed(report.id, report.text));
  }

  TrainHistory history;
  double baseline_ema = 0.0;
  bool baseline_started = false;

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    std::vector<std::size_t> order(train_split.reports.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 shuffle_rng(derive_seed(train_config.seed, "epoch-shuffle",
                                       static_cast<std::uint64_t>(epoch)));
    deterministic_shuffle(order, shuffle_rng);

    double epoch_reward = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train_config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(),
                   start + static_cast<std::size_t>(train_config.batch_size));
      std::vector<BatchItem> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const Report& report = train_split.reports[order[i]];
        const Vec& x = query_embeddings[order[i]];
        const SelectionDistribution dist =
            selection_distribution(params, x, pool);
        SplitMix64 sample_rng(derive_seed(
            train_config.seed, "sample", static_cast<std::uint64_t>(epoch),
            report.id));
        std::vector<int> selected = sample_cot(
            dist, train_config.k_shot, train_config.sampling, sample_rng);

        std::vector<CotSample> exemplars;
        exemplars.reserve(selected.size());
        for (int j : selected) {
          exemplars.push_back(pool.samples[static_cast<std::size_t>(j)]);
        }
        const Prompt prompt =
            build_prompt(schema, kg_text, exemplars, report, tmpl);
        const LlmResponse response = client.complete(prompt);
        const LabelSet predicted =
            try_parse_labels(response.text, schema).value_or(LabelSet{});
        const double reward =
            compute_reward(predicted, *report.labels, reward_config);
        epoch_reward += reward;
        batch.push_back({x, std::move(selected), reward});
      }
      const double baseline =
          (train_config.baseline == BaselineMode::kMovingAverage &&
           baseline_started)
              ? baseline_ema
              : 0.0;
      params = reinforce_update(params, pool, batch, train_config, baseline);
      if (train_config.baseline == BaselineMode::kMovingAverage) {
        double batch_mean = 0.0;
        for (const BatchItem& item : batch) batch_mean += item.reward;
        batch_mean /= static_cast<double>(batch.size());
        baseline_ema = baseline_started
                           ? 0.9 * baseline_ema + 0.1 * batch_mean
                           : batch_mean;
        baseline_started = true;
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_reward =
        epoch_reward / static_cast<double>(train_split.reports.size());
    history.epochs.push_back(record);
    if (sink) sink(record);
  }
  return {std::move(params), std::move(history)};
}

}  // namespace cohort
