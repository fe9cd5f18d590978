#include "cohort/policy.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"

namespace cohort {

CandidatePool load_pool(const std::filesystem::path& path,
                        const LabelSchema& schema, int max_size) {
  if (max_size < 0) throw ValidationError("pool max_size must be >= 0");
  CandidatePool pool;
  std::vector<std::string> seen_ids;
  for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (max_size > 0 && static_cast<int>(pool.samples.size()) >= max_size) {
      return;
    }
    const std::string where = path.string() + ":" + std::to_string(line);
    for (const char* field : {"id", "question", "answer", "labels"}) {
      if (!record.contains(field)) {
        throw ValidationError(where + ": pool record needs \"" +
                              std::string(field) + "\"");
      }
    }
    CotSample sample;
    sample.id = record["id"].get<std::string>();
    if (std::find(seen_ids.begin(), seen_ids.end(), sample.id) !=
        seen_ids.end()) {
      throw ValidationError(where + ": duplicate pool id '" + sample.id + "'");
    }
    seen_ids.push_back(sample.id);
    sample.question = record["question"].get<std::string>();
    sample.answer = record["answer"].get<std::string>();
    if (sample.question.empty() || sample.answer.empty()) {
      throw ValidationError(where + ": pool sample '" + sample.id +
                            "' has an empty question or answer");
    }
    sample.labels = LabelSet(record["labels"].get<std::vector<int>>());
    try {
      schema.validate_label_set(sample.labels);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    pool.samples.push_back(std::move(sample));
  });
  if (pool.samples.empty()) {
    throw ValidationError(path.string() + ": candidate pool is empty");
  }
  return pool;
}

void compute_pool_embeddings(CandidatePool& pool, const Embedder& embedder) {
  pool.embeddings.resize(static_cast<Eigen::Index>(pool.samples.size()),
                         embedder.dim());
  for (std::size_t i = 0; i < pool.samples.size(); ++i) {
    const auto& s = pool.samples[i];
    pool.embeddings.row(static_cast<Eigen::Index>(i)) =
        embedder.embed(s.id, s.question + " " + s.answer).transpose();
  }
}

PolicyParams PolicyParams::init(int hidden_dim, int embed_dim,
                                std::uint64_t seed) {
  if (hidden_dim <= 0 || embed_dim <= 0) {
    throw ValidationError("policy dimensions must be positive");
  }
  PolicyParams params;
  params.W.resize(hidden_dim, embed_dim);
  SplitMix64 rng(derive_seed(seed, "policy-init"));
  for (int r = 0; r < hidden_dim; ++r) {
    for (int c = 0; c < embed_dim; ++c) {
      params.W(r, c) = 0.1 * rng.next_gaussian();
    }
  }
  params.b = Eigen::VectorXd::Zero(hidden_dim);
  return params;
}

void PolicyParams::save(const std::filesystem::path& path,
                        const std::string& config_echo_json) const {
  nlohmann::json doc;
  doc["h"] = hidden_dim();
  doc["d"] = embed_dim();
  std::vector<double> w_flat;
  w_flat.reserve(static_cast<std::size_t>(W.size()));
  for (int r = 0; r < W.rows(); ++r) {
    for (int c = 0; c < W.cols(); ++c) w_flat.push_back(W(r, c));
  }
  doc["W"] = w_flat;
  doc["b"] = std::vector<double>(b.data(), b.data() + b.size());
  try {
    doc["config"] = nlohmann::json::parse(config_echo_json);
  } catch (const nlohmann::json::parse_error&) {
    throw ValidationError("policy config echo is not valid JSON");
  }
  write_json_file(path, doc);
}

PolicyParams PolicyParams::load(const std::filesystem::path& path) {
  const nlohmann::json doc = read_json_file(path);
  for (const char* field : {"h", "d", "W", "b"}) {
    if (!doc.contains(field)) {
      throw ValidationError(path.string() + ": policy file needs \"" +
                            std::string(field) + "\"");
    }
  }
  const int h = doc["h"].get<int>();
  const int d = doc["d"].get<int>();
  if (h <= 0 || d <= 0) {
    throw ValidationError(path.string() + ": policy dimensions must be "
                          "positive");
  }
  const auto w_flat = doc["W"].get<std::vector<double>>();
  const auto b_flat = doc["b"].get<std::vector<double>>();
  if (w_flat.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(d)) {
    throw ValidationError(path.string() + ": W has " +
                          std::to_string(w_flat.size()) +
                          " entries, expected " + std::to_string(h * d));
  }
  if (b_flat.size() != static_cast<std::size_t>(h)) {
    throw ValidationError(path.string() + ": b has " +
                          std::to_string(b_flat.size()) +
                          " entries, expected " + std::to_string(h));
  }
  PolicyParams params;
  params.W.resize(h, d);
  std::size_t k = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < d; ++c) params.W(r, c) = w_flat[k++];
  }
  params.b = Eigen::Map<const Eigen::VectorXd>(b_flat.data(), h);
  if (doc.contains("config")) {
    params.config_echo = doc["config"].dump();
  }
  return params;
}

Eigen::VectorXd project(const PolicyParams& params, const Vec& embedding) {
  if (embedding.size() != params.W.cols()) {
    throw ValidationError("embedding size " + std::to_string(embedding.size()) +
                          " does not match policy input size " +
                          std::to_string(params.W.cols()));
  }
  return params.W * embedding + params.b;
}

SelectionDistribution selection_distribution(const PolicyParams& params,
                                             const Vec& query_embedding,
                                             const CandidatePool& pool) {
  if (!pool.has_embeddings()) {
    throw ValidationError(
        "candidate pool has no embeddings; call compute_pool_embeddings");
  }
  if (pool.embeddings.cols() != params.W.cols()) {
    throw ValidationError("pool embedding size " +
                          std::to_string(pool.embeddings.cols()) +
                          " does not match policy input size " +
                          std::to_string(params.W.cols()));
  }
  SelectionDistribution dist;
  dist.query_hidden = project(params, query_embedding);
  // Row j of pool_hidden is (W e_j + b)^T.
  dist.pool_hidden = pool.embeddings * params.W.transpose();
  dist.pool_hidden.rowwise() += params.b.transpose();
  dist.scores = dist.pool_hidden * dist.query_hidden;
  const double shift = dist.scores.maxCoeff();
  dist.probabilities = (dist.scores.array() - shift).exp();
  dist.probabilities /= dist.probabilities.sum();
  return dist;
}

SamplingMode sampling_mode_from_string(const std::string& name) {
  if (name == "without") return SamplingMode::kWithoutReplacement;
  if (name == "with") return SamplingMode::kWithReplacement;
  throw ValidationError("unknown sampling mode '" + name +
                        "' (expected without|with)");
}

BaselineMode baseline_mode_from_string(const std::string& name) {
  if (name == "off") return BaselineMode::kOff;
  if (name == "moving-average") return BaselineMode::kMovingAverage;
  throw ValidationError("unknown baseline mode '" + name +
                        "' (expected off|moving-average)");
}

std::string to_string(SamplingMode mode) {
  return mode == SamplingMode::kWithoutReplacement ? "without" : "with";
}

std::string to_string(BaselineMode mode) {
  return mode == BaselineMode::kOff ? "off" : "moving-average";
}

namespace {

// One categorical draw proportional to the weights; total > 0.
int categorical_draw(const Eigen::VectorXd& weights, double total,
                     SplitMix64& rng) {
  const double r = rng.next_double() * total;
  double cumulative = 0.0;
  int last_positive = -1;
  for (int j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    last_positive = j;
    cumulative += weights[j];
    if (r < cumulative) return j;
  }
  // Floating-point shortfall at the top of the range.
  return last_positive;
}

}  // namespace

std::vector<int> sample_cot(const SelectionDistribution& dist, int k,
                            SamplingMode mode, SplitMix64& rng) {
  const int pool_size = static_cast<int>(dist.probabilities.size());
  if (k <= 0) throw ValidationError("k_shot must be positive");
  if (mode == SamplingMode::kWithoutReplacement && k > pool_size) {
    throw ValidationError("cannot draw " + std::to_string(k) +
                          " distinct exemplars from a pool of " +
                          std::to_string(pool_size));
  }
  std::vector<int> selected;
  selected.reserve(static_cast<std::size_t>(k));
  if (mode == SamplingMode::kWithReplacement) {
    for (int i = 0; i < k; ++i) {
      selected.push_back(categorical_draw(dist.probabilities, 1.0, rng));
    }
    return selected;
  }
  Eigen::VectorXd weights = dist.probabilities;
  double total = 1.0;
  for (int i = 0; i < k; ++i) {
    const int j = categorical_draw(weights, total, rng);
    selected.push_back(j);
    total -= weights[j];
    weights[j] = 0.0;
    if (total <= 0.0 && i + 1 < k) {
      // Numerically exhausted distribution: fall back to the first
      // still-unselected indices to honor the requested k.
      for (int m = 0; m < pool_size && static_cast<int>(selected.size()) < k;
           ++m) {
        if (std::find(selected.begin(), selected.end(), m) == selected.end()) {
          selected.push_back(m);
        }
      }
      break;
    }
  }
  return selected;
}

double compute_reward(const LabelSet& predicted, const LabelSet& truth,
                      const RewardConfig& config) {
  if (config.label_count <= 0) {
    throw ValidationError("reward label_count must be positive");
  }
  double total = 0.0;
  for (int l = 1; l <= config.label_count; ++l) {
    const double sigma =
        (predicted.contains(l) == truth.contains(l)) ? 1.0 : -1.0;
    total += config.lambda1 * sigma - config.lambda2 * sigma;
  }
  return total / config.label_count;
}

double log_prob_of_selection(const SelectionDistribution& dist,
                             const std::vector<int>& selected) {
  double total = 0.0;
  for (int j : selected) {
    if (j < 0 || j >= dist.probabilities.size()) {
      throw ValidationError("selected index " + std::to_string(j) +
                            " outside the pool");
    }
    total += std::log(dist.probabilities[j]);
  }
  return total;
}

PolicyGradient log_prob_gradient(const PolicyParams& params,
                                 const Vec& query_embedding,
                                 const CandidatePool& pool,
                                 const std::vector<int>& selected) {
  return log_prob_gradient(
      selection_distribution(params, query_embedding, pool), query_embedding,
      pool, selected);
}

PolicyGradient log_prob_gradient(const SelectionDistribution& dist,
                                 const Vec& query_embedding,
                                 const CandidatePool& pool,
                                 const std::vector<int>& selected) {
  // d log P / d s_j = m_j - K p_j =: alpha_j, with m_j the number of times j
  // was picked. Score gradients are d s_j / dW = v_j x^T + u e_j^T and
  // d s_j / db = u + v_j, so everything reduces to the alpha-weighted sums
  //   a = sum_j alpha_j v_j   and   g = sum_j alpha_j e_j:
  //   dW = a x^T + u g^T,  db = (sum_j alpha_j) u + a.
  const int pool_size = static_cast<int>(dist.probabilities.size());
  if (selected.empty()) {
    throw ValidationError("cannot take a gradient of an empty selection");
  }
  Eigen::VectorXd alpha =
      -static_cast<double>(selected.size()) * dist.probabilities;
  for (int j : selected) {
    if (j < 0 || j >= pool_size) {
      throw ValidationError("selected index " + std::to_string(j) +
                            " outside the pool");
    }
    alpha[j] += 1.0;
  }
  const Eigen::VectorXd a = dist.pool_hidden.transpose() * alpha;
  const Eigen::VectorXd g = pool.embeddings.transpose() * alpha;
  PolicyGradient grad;
  grad.dW = a * query_embedding.transpose() + dist.query_hidden * g.transpose();
  grad.db = alpha.sum() * dist.query_hidden + a;
  return grad;
}

PolicyParams reinforce_update(const PolicyParams& params,
                              const CandidatePool& pool,
                              const std::vector<BatchItem>& batch,
                              const TrainConfig& config, double baseline) {
  if (batch.empty()) return params;
  Eigen::MatrixXd dW = Eigen::MatrixXd::Zero(params.W.rows(), params.W.cols());
  Eigen::VectorXd db = Eigen::VectorXd::Zero(params.b.size());
  for (const auto& item : batch) {
    const PolicyGradient grad =
        log_prob_gradient(params, item.query_embedding, pool, item.selected);
    const double advantage = item.reward - baseline;
    dW += advantage * grad.dW;
    db += advantage * grad.db;
  }
  const double scale =
      config.learning_rate / static_cast<double>(batch.size());
  PolicyParams next = params;
  next.W += scale * dW;
  next.b += scale * db;
  return next;
}

void save_history(const std::filesystem::path& path,
                  const TrainHistory& history) {
  std::string text;
  for (const auto& record : history.epochs) {
    text += to_jsonl_record(
                {{"epoch", record.epoch}, {"mean_reward", record.mean_reward}}) +
            "\n";
  }
  write_text_file(path, text);
}

TrainHistory load_history(const std::filesystem::path& path) {
  TrainHistory history;
  for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (!record.contains("epoch") || !record.contains("mean_reward")) {
      throw ValidationError(path.string() + ":" + std::to_string(line) +
                            ": history record needs \"epoch\" and "
                            "\"mean_reward\"");
    }
    history.epochs.push_back(
        {record["epoch"].get<int>(), record["mean_reward"].get<double>()});
  });
  return history;
}

}  // namespace cohort
