#include "cohort/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"

namespace cohort {

MetricsReport compute_metrics(const std::vector<Prediction>& predictions,
                              int label_count) {
  if (predictions.empty()) {
    throw ValidationError("cannot compute metrics over zero predictions");
  }
  if (label_count <= 0) {
    throw ValidationError("metrics label_count must be positive");
  }
  MetricsReport report;
  report.n = static_cast<int>(predictions.size());
  for (const Prediction& p : predictions) {
    const double inter = LabelSet::intersection_size(p.predicted, p.truth);
    const double z = static_cast<double>(p.predicted.size());
    const double y = static_cast<double>(p.truth.size());
    report.exact_match += (p.predicted == p.truth) ? 1.0 : 0.0;
    report.precision += z > 0.0 ? inter / z : 0.0;
    report.recall += y > 0.0 ? inter / y : 0.0;
    report.f1 += (y + z) > 0.0 ? 2.0 * inter / (y + z) : 0.0;
    report.hamming_loss +=
        static_cast<double>(
            LabelSet::symmetric_difference_size(p.predicted, p.truth)) /
        label_count;
  }
  const double n = static_cast<double>(report.n);
  report.exact_match /= n;
  report.precision /= n;
  report.recall /= n;
  report.f1 /= n;
  report.hamming_loss /= n;
  return report;
}

namespace {

void check_k(std::size_t pool_size, int k) {
  if (k <= 0) throw ValidationError("k_shot must be positive");
  if (static_cast<std::size_t>(k) > pool_size) {
    throw ValidationError("k_shot " + std::to_string(k) +
                          " exceeds the pool size " +
                          std::to_string(pool_size));
  }
}

}  // namespace

std::vector<int> select_random(const CandidatePool& pool, int k,
                               SplitMix64& rng) {
  check_k(pool.size(), k);
  std::vector<int> indices(pool.size());
  std::iota(indices.begin(), indices.end(), 0);
  deterministic_shuffle(indices, rng);
  indices.resize(static_cast<std::size_t>(k));
  return indices;
}

std::vector<int> select_manual(const CandidatePool& pool, int k) {
  check_k(pool.size(), k);
  std::vector<int> indices(pool.size());
  std::iota(indices.begin(), indices.end(), 0);
  std::sort(indices.begin(), indices.end(), [&](int a, int b) {
    const auto& sa = pool.samples[static_cast<std::size_t>(a)];
    const auto& sb = pool.samples[static_cast<std::size_t>(b)];
    const std::size_t la = sa.question.size() + sa.answer.size();
    const std::size_t lb = sb.question.size() + sb.answer.size();
    if (la != lb) return la > lb;
    return sa.id < sb.id;
  });
  indices.resize(static_cast<std::size_t>(k));
  return indices;
}

std::vector<int> select_most_similar(const CandidatePool& pool,
                                     const Vec& query_embedding, int k) {
  check_k(pool.size(), k);
  if (!pool.has_embeddings()) {
    throw ValidationError(
        "candidate pool has no embeddings; call compute_pool_embeddings");
  }
  const double query_norm = query_embedding.norm();
  std::vector<double> similarity(pool.size(), 0.0);
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const auto row = pool.embeddings.row(static_cast<Eigen::Index>(j));
    const double denom = query_norm * row.norm();
    similarity[j] = denom > 0.0 ? row.dot(query_embedding) / denom : 0.0;
  }
  std::vector<int> indices(pool.size());
  std::iota(indices.begin(), indices.end(), 0);
  std::sort(indices.begin(), indices.end(), [&](int a, int b) {
    const double sa = similarity[static_cast<std::size_t>(a)];
    const double sb = similarity[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  indices.resize(static_cast<std::size_t>(k));
  return indices;
}

std::vector<int> select_greedy_topk(const SelectionDistribution& dist, int k) {
  check_k(static_cast<std::size_t>(dist.probabilities.size()), k);
  std::vector<int> indices(static_cast<std::size_t>(dist.probabilities.size()));
  std::iota(indices.begin(), indices.end(), 0);
  std::sort(indices.begin(), indices.end(), [&](int a, int b) {
    const double pa = dist.probabilities[a];
    const double pb = dist.probabilities[b];
    if (pa != pb) return pa > pb;
    return a < b;
  });
  indices.resize(static_cast<std::size_t>(k));
  return indices;
}

SelectionStrategy selection_strategy_from_string(const std::string& name) {
  if (name == "none") return SelectionStrategy::kNone;
  if (name == "random") return SelectionStrategy::kRandom;
  if (name == "manual") return SelectionStrategy::kManual;
  if (name == "most_similar") return SelectionStrategy::kMostSimilar;
  if (name == "dynamic") return SelectionStrategy::kDynamic;
  throw ValidationError(
      "unknown selection strategy '" + name +
      "' (expected none|random|manual|most_similar|dynamic)");
}

std::string to_string(SelectionStrategy strategy) {
  switch (strategy) {
    case SelectionStrategy::kNone: return "none";
    case SelectionStrategy::kRandom: return "random";
    case SelectionStrategy::kManual: return "manual";
    case SelectionStrategy::kMostSimilar: return "most_similar";
    case SelectionStrategy::kDynamic: return "dynamic";
  }
  throw ValidationError("invalid selection strategy value");
}

std::vector<Prediction> predict_batch(
    const std::vector<Report>& reports, const PredictOptions& options,
    const CandidatePool& pool, const std::string& kg_text, LlmClient& client,
    const Embedder& embedder, const LabelSchema& schema,
    const PromptTemplate& tmpl, const PredictionSink& sink) {
  if (options.strategy == SelectionStrategy::kDynamic &&
      options.params == nullptr) {
    throw ValidationError(
        "the dynamic strategy needs trained policy parameters");
  }
  // Strategies that do not depend on the query are resolved once.
  std::vector<int> fixed_selection;
  if (options.strategy == SelectionStrategy::kManual) {
    fixed_selection = select_manual(pool, options.k_shot);
  }
  SplitMix64 random_rng(derive_seed(options.seed, "predict-random"));

  std::vector<Prediction> predictions;
  predictions.reserve(reports.size());
  for (const Report& report : reports) {
    std::vector<int> selection;
    switch (options.strategy) {
      case SelectionStrategy::kNone:
        break;
      case SelectionStrategy::kRandom:
        selection = select_random(pool, options.k_shot, random_rng);
        break;
      case SelectionStrategy::kManual:
        selection = fixed_selection;
        break;
      case SelectionStrategy::kMostSimilar:
        selection = select_most_similar(
            pool, embedder.embed(report.id, report.text), options.k_shot);
        break;
      case SelectionStrategy::kDynamic: {
        const SelectionDistribution dist = selection_distribution(
            *options.params, embedder.embed(report.id, report.text), pool);
        selection = select_greedy_topk(dist, options.k_shot);
        break;
      }
    }
    std::vector<CotSample> exemplars;
    exemplars.reserve(selection.size());
    for (int j : selection) {
      exemplars.push_back(pool.samples[static_cast<std::size_t>(j)]);
    }
    const Prompt prompt =
        build_prompt(schema, kg_text, exemplars, report, tmpl);
    const LlmResponse response = client.complete(prompt);

    Prediction prediction;
    prediction.report_id = report.id;
    prediction.truth = report.labels.value_or(LabelSet{});
    if (auto labels = try_parse_labels(response.text, schema)) {
      prediction.predicted = std::move(*labels);
      prediction.parse_ok = true;
    } else {
      prediction.parse_ok = false;
    }
    if (sink) sink(prediction);
    predictions.push_back(std::move(prediction));
  }
  return predictions;
}

void save_predictions(const std::filesystem::path& path,
                      const std::vector<Prediction>& predictions) {
  std::string text;
  for (const Prediction& p : predictions) {
    text += to_jsonl_record({{"report_id", p.report_id},
                             {"predicted", p.predicted.indices()},
                             {"truth", p.truth.indices()},
                             {"parse_ok", p.parse_ok}}) +
            "\n";
  }
  write_text_file(path, text);
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> predictions;
  for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    for (const char* field : {"report_id", "predicted", "truth", "parse_ok"}) {
      if (!record.contains(field)) {
        throw ValidationError(path.string() + ":" + std::to_string(line) +
                              ": prediction record needs \"" +
                              std::string(field) + "\"");
      }
    }
    Prediction p;
    p.report_id = record["report_id"].get<std::string>();
    p.predicted = LabelSet(record["predicted"].get<std::vector<int>>());
    p.truth = LabelSet(record["truth"].get<std::vector<int>>());
    p.parse_ok = record["parse_ok"].get<bool>();
    predictions.push_back(std::move(p));
  });
  return predictions;
}

}  // namespace cohort
