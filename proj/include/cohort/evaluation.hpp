#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cohort/dataset.hpp"
#include "cohort/embedding.hpp"
#include "cohort/llm.hpp"
#include "cohort/policy.hpp"
#include "cohort/prompting.hpp"
#include "cohort/rng.hpp"
#include "cohort/schema.hpp"

namespace cohort {

struct Prediction {
  std::string report_id;
  LabelSet predicted;
  LabelSet truth;
  bool parse_ok = true;
};

// Instance-averaged multi-label metrics. Per report with truth Y and
// prediction Z: precision |Y∩Z|/|Z| (0 when Z is empty), recall |Y∩Z|/|Y|
// (0 when Y is empty), F1 2|Y∩Z|/(|Y|+|Z|) (0 when both are empty), exact
// match [Y == Z], Hamming loss |Y△Z|/L; all averaged over reports.
struct MetricsReport {
  double exact_match = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double hamming_loss = 0.0;
  int n = 0;
};

MetricsReport compute_metrics(const std::vector<Prediction>& predictions,
                              int label_count);

// --- exemplar selection strategies ---------------------------------------

// k distinct pool indices uniformly at random.
std::vector<int> select_random(const CandidatePool& pool, int k,
                               SplitMix64& rng);
// The k samples with the longest combined question+answer character count
// (a curated-by-size stand-in for hand-picked exemplars); ties by id.
std::vector<int> select_manual(const CandidatePool& pool, int k);
// The k samples with the highest cosine similarity to the query embedding;
// ties by pool index.
std::vector<int> select_most_similar(const CandidatePool& pool,
                                     const Vec& query_embedding, int k);
// The k most probable indices under the policy distribution (greedy, no
// sampling — inference-time behavior of the trained policy); ties by index.
std::vector<int> select_greedy_topk(const SelectionDistribution& dist, int k);

enum class SelectionStrategy { kNone, kRandom, kManual, kMostSimilar, kDynamic };

SelectionStrategy selection_strategy_from_string(const std::string& name);
std::string to_string(SelectionStrategy strategy);

struct PredictOptions {
  SelectionStrategy strategy = SelectionStrategy::kDynamic;
  int k_shot = 5;
  // Required for kDynamic.
  const PolicyParams* params = nullptr;
  // Drives the kRandom strategy.
  std::uint64_t seed = 0;
};

using PredictionSink = std::function<void(const Prediction&)>;

// Runs the full prompt -> model -> parse pipeline over a labeled report
// batch. A parse failure yields an empty prediction with parse_ok = false.
// Client errors propagate after the sink has seen all completed reports.
std::vector<Prediction> predict_batch(
    const std::vector<Report>& reports, const PredictOptions& options,
    const CandidatePool& pool, const std::string& kg_text, LlmClient& client,
    const Embedder& embedder, const LabelSchema& schema,
    const PromptTemplate& tmpl = PromptTemplate::defaults(),
    const PredictionSink& sink = {});

// JSONL records {"report_id","predicted","truth","parse_ok"}.
void save_predictions(const std::filesystem::path& path,
                      const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

}  // namespace cohort
