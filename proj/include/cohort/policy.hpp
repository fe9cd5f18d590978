#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cohort/embedding.hpp"
#include "cohort/rng.hpp"
#include "cohort/schema.hpp"

namespace cohort {

// One annotated chain-of-thought exemplar: a report-style question, a
// worked answer ending in a label declaration, and the label set it asserts.
struct CotSample {
  std::string id;
  std::string question;
  std::string answer;
  LabelSet labels;
};

struct CandidatePool {
  std::vector<CotSample> samples;
  // One row per sample, filled by compute_pool_embeddings. Empty until then.
  Eigen::MatrixXd embeddings;

  std::size_t size() const { return samples.size(); }
  bool has_embeddings() const {
    return embeddings.rows() == static_cast<Eigen::Index>(samples.size()) &&
           embeddings.cols() > 0;
  }
};

// Loads JSONL records {"id","question","answer","labels"}; validates label
// sets against the schema and rejects duplicate ids. max_size > 0 keeps only
// the first max_size records (the pool-size knob); 0 keeps everything.
CandidatePool load_pool(const std::filesystem::path& path,
                        const LabelSchema& schema, int max_size = 0);

// Embeds question + " " + answer for every sample.
void compute_pool_embeddings(CandidatePool& pool, const Embedder& embedder);

// The policy is a single shared affine map z -> W z + b applied to both the
// query embedding and each candidate embedding; the score of candidate j is
// the dot product of the two images and selection probabilities are the
// softmax of the scores.
struct PolicyParams {
  Eigen::MatrixXd W;  // hidden_dim x embed_dim
  Eigen::VectorXd b;  // hidden_dim

  int hidden_dim() const { return static_cast<int>(W.rows()); }
  int embed_dim() const { return static_cast<int>(W.cols()); }

  // Small gaussian W, zero b. (All-zero W would make every score zero with a
  // zero gradient through the dot product — a stuck point.)
  static PolicyParams init(int hidden_dim, int embed_dim, std::uint64_t seed);

  // JSON files {"h","d","W" (row-major),"b","config"}; config is an opaque
  // echo of the producing run's settings.
  void save(const std::filesystem::path& path,
            const std::string& config_echo_json = "{}") const;
  static PolicyParams load(const std::filesystem::path& path);

  std::string config_echo = "{}";
};

struct SelectionDistribution {
  Eigen::VectorXd scores;          // s_j
  Eigen::VectorXd probabilities;   // softmax(s), computed max-shifted
  // Cached projections so gradient evaluation does not redo the linear
  // algebra: query_hidden = W x + b, pool_hidden row j = (W e_j + b)^T.
  Eigen::VectorXd query_hidden;
  Eigen::MatrixXd pool_hidden;
};

Eigen::VectorXd project(const PolicyParams& params, const Vec& embedding);

SelectionDistribution selection_distribution(const PolicyParams& params,
                                             const Vec& query_embedding,
                                             const CandidatePool& pool);

enum class SamplingMode { kWithoutReplacement, kWithReplacement };
enum class BaselineMode { kOff, kMovingAverage };

SamplingMode sampling_mode_from_string(const std::string& name);
BaselineMode baseline_mode_from_string(const std::string& name);
std::string to_string(SamplingMode mode);
std::string to_string(BaselineMode mode);

// Draws k candidate indices. Without replacement: iterative renormalized
// draws (k must not exceed the pool). With replacement: k independent draws.
std::vector<int> sample_cot(const SelectionDistribution& dist, int k,
                            SamplingMode mode, SplitMix64& rng);

struct RewardConfig {
  double lambda1 = 1.0;
  double lambda2 = -10.0;
  int label_count = 20;
};

// Per-label signed agreement between prediction and truth, weighted lambda1
// on the positive side and -lambda2 on the negative side, averaged over the
// label space:
//   r = (1/L) * sum_l (lambda1 * sigma_l - lambda2 * sigma_l),
// sigma_l = +1 when prediction and truth agree on label l, else -1. With the
// defaults the reward spans [-11, +11] and a fully correct prediction earns
// +11.
double compute_reward(const LabelSet& predicted, const LabelSet& truth,
                      const RewardConfig& config);

// log P(selection | x) when the selection log-probability factorizes as the
// sum of per-pick log pi(c_k | x) under one fixed distribution.
double log_prob_of_selection(const SelectionDistribution& dist,
                             const std::vector<int>& selected);

struct PolicyGradient {
  Eigen::MatrixXd dW;
  Eigen::VectorXd db;
};

// Analytic gradient of log P(selection | x) with respect to W and b.
PolicyGradient log_prob_gradient(const PolicyParams& params,
                                 const Vec& query_embedding,
                                 const CandidatePool& pool,
                                 const std::vector<int>& selected);
// Same, reusing an already computed distribution for this query.
PolicyGradient log_prob_gradient(const SelectionDistribution& dist,
                                 const Vec& query_embedding,
                                 const CandidatePool& pool,
                                 const std::vector<int>& selected);

struct TrainConfig {
  int k_shot = 5;
  int batch_size = 8;
  double learning_rate = 1e-3;
  int epochs = 15;
  std::uint64_t seed = 0;
  BaselineMode baseline = BaselineMode::kOff;
  SamplingMode sampling = SamplingMode::kWithoutReplacement;
  int hidden_dim = 128;
};

struct BatchItem {
  Vec query_embedding;
  std::vector<int> selected;
  double reward;
};

// One REINFORCE ascent step over a batch:
//   theta += lr * (1/|batch|) * sum_i (r_i - baseline) * grad log P_i.
PolicyParams reinforce_update(const PolicyParams& params,
                              const CandidatePool& pool,
                              const std::vector<BatchItem>& batch,
                              const TrainConfig& config,
                              double baseline = 0.0);

struct EpochRecord {
  int epoch = 0;          // 1-based
  double mean_reward = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

void save_history(const std::filesystem::path& path,
                  const TrainHistory& history);
TrainHistory load_history(const std::filesystem::path& path);

}  // namespace cohort
