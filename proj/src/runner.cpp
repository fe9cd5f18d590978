#include "cohort/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cohort/dataset.hpp"
#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"
#include "cohort/trainer.hpp"

namespace cohort {

namespace {

namespace fs = std::filesystem;

void note_unknown_keys(const nlohmann::json& obj, const char* where,
                       const std::set<std::string>& allowed,
                       std::vector<std::string>& errors) {
  if (!obj.is_object()) return;
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      errors.push_back(std::string(where) + ": unknown key \"" + key + "\"");
    }
  }
}

template <typename T>
T get_field(const nlohmann::json& obj, const char* where, const char* key,
            T fallback, std::vector<std::string>& errors) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    errors.push_back(std::string(where) + "." + key + " has the wrong type");
    return fallback;
  }
}

std::string require_string(const nlohmann::json& obj, const char* where,
                           const char* key, std::vector<std::string>& errors) {
  if (!obj.is_object() || !obj.contains(key)) {
    errors.push_back(std::string(where) + "." + key + " is required");
    return "";
  }
  return get_field<std::string>(obj, where, key, "", errors);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  if (!doc.is_object()) {
    throw ValidationError("experiment config must be a JSON object");
  }
  note_unknown_keys(doc, "config",
                    {"schema", "dataset", "kg", "kg_strategy", "pool",
                     "pool_size", "train_count", "k_shot", "selection",
                     "policy", "reward", "embedding", "llm", "template",
                     "seeds", "output_dir"},
                    errors);

  ExperimentConfig cfg;
  cfg.schema_path = require_string(doc, "config", "schema", errors);
  cfg.dataset_path = require_string(doc, "config", "dataset", errors);
  cfg.pool_path = require_string(doc, "config", "pool", errors);
  cfg.output_dir = require_string(doc, "config", "output_dir", errors);
  cfg.kg_path = get_field<std::string>(doc, "config", "kg", "", errors);
  cfg.template_path =
      get_field<std::string>(doc, "config", "template", "", errors);

  try {
    cfg.kg_strategy = kg_strategy_from_string(
        get_field<std::string>(doc, "config", "kg_strategy", "rule", errors));
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }
  try {
    cfg.selection = selection_strategy_from_string(get_field<std::string>(
        doc, "config", "selection", "dynamic", errors));
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }

  cfg.pool_size = get_field<int>(doc, "config", "pool_size", 0, errors);
  if (cfg.pool_size < 0) errors.push_back("config.pool_size must be >= 0");
  if (!doc.contains("train_count")) {
    errors.push_back("config.train_count is required");
  }
  cfg.train_count = get_field<int>(doc, "config", "train_count", 0, errors);
  if (cfg.train_count < 0) errors.push_back("config.train_count must be >= 0");

  cfg.train.k_shot = get_field<int>(doc, "config", "k_shot", 5, errors);
  if (cfg.train.k_shot < 1) errors.push_back("config.k_shot must be >= 1");

  const nlohmann::json policy =
      doc.contains("policy") ? doc["policy"] : nlohmann::json::object();
  note_unknown_keys(policy, "config.policy",
                    {"hidden_dim", "learning_rate", "batch_size", "epochs",
                     "baseline", "replacement"},
                    errors);
  cfg.train.hidden_dim =
      get_field<int>(policy, "config.policy", "hidden_dim", 128, errors);
  cfg.train.learning_rate = get_field<double>(policy, "config.policy",
                                              "learning_rate", 1e-3, errors);
  cfg.train.batch_size =
      get_field<int>(policy, "config.policy", "batch_size", 8, errors);
  cfg.train.epochs =
      get_field<int>(policy, "config.policy", "epochs", 15, errors);
  if (cfg.train.hidden_dim < 1) {
    errors.push_back("config.policy.hidden_dim must be >= 1");
  }
  if (cfg.train.learning_rate <= 0.0) {
    errors.push_back("config.policy.learning_rate must be > 0");
  }
  if (cfg.train.batch_size < 1) {
    errors.push_back("config.policy.batch_size must be >= 1");
  }
  if (cfg.train.epochs < 1) errors.push_back("config.policy.epochs must be >= 1");
  try {
    cfg.train.baseline = baseline_mode_from_string(get_field<std::string>(
        policy, "config.policy", "baseline", "off", errors));
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }
  try {
    cfg.train.sampling = sampling_mode_from_string(get_field<std::string>(
        policy, "config.policy", "replacement", "without", errors));
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }

  const nlohmann::json reward =
      doc.contains("reward") ? doc["reward"] : nlohmann::json::object();
  note_unknown_keys(reward, "config.reward", {"lambda1", "lambda2"}, errors);
  cfg.reward.lambda1 =
      get_field<double>(reward, "config.reward", "lambda1", 1.0, errors);
  cfg.reward.lambda2 =
      get_field<double>(reward, "config.reward", "lambda2", -10.0, errors);

  const nlohmann::json embedding =
      doc.contains("embedding") ? doc["embedding"] : nlohmann::json::object();
  note_unknown_keys(embedding, "config.embedding",
                    {"backend", "dim", "table_path"}, errors);
  const std::string embed_backend = get_field<std::string>(
      embedding, "config.embedding", "backend", "hashed", errors);
  if (embed_backend == "hashed") {
    cfg.embedding.backend = EmbedderConfig::Backend::kHashed;
  } else if (embed_backend == "file") {
    cfg.embedding.backend = EmbedderConfig::Backend::kFile;
  } else {
    errors.push_back("config.embedding.backend must be hashed|file");
  }
  cfg.embedding.dim =
      get_field<int>(embedding, "config.embedding", "dim", 256, errors);
  cfg.embedding.table_path = get_field<std::string>(
      embedding, "config.embedding", "table_path", "", errors);
  if (cfg.embedding.backend == EmbedderConfig::Backend::kHashed &&
      cfg.embedding.dim < 1) {
    errors.push_back("config.embedding.dim must be >= 1");
  }
  if (cfg.embedding.backend == EmbedderConfig::Backend::kFile &&
      cfg.embedding.table_path.empty()) {
    errors.push_back(
        "config.embedding.table_path is required for the file backend");
  }

  const nlohmann::json llm =
      doc.contains("llm") ? doc["llm"] : nlohmann::json::object();
  note_unknown_keys(llm, "config.llm",
                    {"backend", "oracle", "http", "cache_dir"}, errors);
  const std::string llm_backend =
      get_field<std::string>(llm, "config.llm", "backend", "simulated",
                             errors);
  if (llm_backend == "simulated") {
    cfg.llm_backend = LlmBackendKind::kSimulated;
  } else if (llm_backend == "http") {
    cfg.llm_backend = LlmBackendKind::kHttp;
  } else {
    errors.push_back("config.llm.backend must be simulated|http");
  }
  cfg.cache_dir =
      get_field<std::string>(llm, "config.llm", "cache_dir", "", errors);

  const nlohmann::json oracle =
      llm.is_object() && llm.contains("oracle") ? llm["oracle"]
                                                : nlohmann::json::object();
  note_unknown_keys(oracle, "config.llm.oracle",
                    {"p_hit", "p_fp", "boost", "seed"}, errors);
  cfg.oracle.p_hit =
      get_field<double>(oracle, "config.llm.oracle", "p_hit", 0.5, errors);
  cfg.oracle.p_fp =
      get_field<double>(oracle, "config.llm.oracle", "p_fp", 0.05, errors);
  cfg.oracle.boost =
      get_field<double>(oracle, "config.llm.oracle", "boost", 0.2, errors);
  cfg.oracle.seed = get_field<std::uint64_t>(oracle, "config.llm.oracle",
                                             "seed", 0, errors);
  if (cfg.oracle.p_hit < 0.0 || cfg.oracle.p_hit > 1.0) {
    errors.push_back("config.llm.oracle.p_hit must be within [0, 1]");
  }
  if (cfg.oracle.p_fp < 0.0 || cfg.oracle.p_fp > 1.0) {
    errors.push_back("config.llm.oracle.p_fp must be within [0, 1]");
  }
  if (cfg.oracle.boost < 0.0) {
    errors.push_back("config.llm.oracle.boost must be >= 0");
  }

  const nlohmann::json http = llm.is_object() && llm.contains("http")
                                  ? llm["http"]
                                  : nlohmann::json::object();
  note_unknown_keys(http, "config.llm.http",
                    {"url", "model", "temperature", "system_message",
                     "api_key_env", "max_attempts", "initial_backoff_ms",
                     "max_backoff_ms", "requests_per_second", "burst",
                     "timeout_seconds"},
                    errors);
  cfg.http.url = get_field<std::string>(http, "config.llm.http", "url", "",
                                        errors);
  cfg.http.model = get_field<std::string>(http, "config.llm.http", "model",
                                          "gpt-3.5-turbo", errors);
  cfg.http.temperature =
      get_field<double>(http, "config.llm.http", "temperature", 0.0, errors);
  cfg.http.system_message = get_field<std::string>(
      http, "config.llm.http", "system_message", "", errors);
  cfg.http.api_key_env = get_field<std::string>(
      http, "config.llm.http", "api_key_env", "COHORT_LLM_API_KEY", errors);
  cfg.http.max_attempts =
      get_field<int>(http, "config.llm.http", "max_attempts", 3, errors);
  cfg.http.initial_backoff_ms = get_field<int>(
      http, "config.llm.http", "initial_backoff_ms", 200, errors);
  cfg.http.max_backoff_ms = get_field<int>(http, "config.llm.http",
                                           "max_backoff_ms", 10'000, errors);
  cfg.http.requests_per_second = get_field<double>(
      http, "config.llm.http", "requests_per_second", 0.0, errors);
  cfg.http.burst =
      get_field<double>(http, "config.llm.http", "burst", 1.0, errors);
  cfg.http.timeout_seconds =
      get_field<int>(http, "config.llm.http", "timeout_seconds", 60, errors);
  if (cfg.http.max_attempts < 1) {
    errors.push_back("config.llm.http.max_attempts must be >= 1");
  }
  if (cfg.http.temperature < 0.0) {
    errors.push_back("config.llm.http.temperature must be >= 0");
  }
  if (cfg.http.requests_per_second < 0.0) {
    errors.push_back("config.llm.http.requests_per_second must be >= 0");
  }
  if (cfg.llm_backend == LlmBackendKind::kHttp && cfg.http.url.empty()) {
    errors.push_back("config.llm.http.url is required for the http backend");
  }

  cfg.seeds = get_field<std::vector<std::uint64_t>>(doc, "config", "seeds",
                                                    {1, 2, 3, 4, 5}, errors);
  if (cfg.seeds.empty()) errors.push_back("config.seeds must be non-empty");

  if (cfg.kg_strategy != KgStrategy::kNone && cfg.kg_path.empty()) {
    errors.push_back(
        "config.kg is required unless kg_strategy is \"none\"");
  }

  if (!errors.empty()) {
    std::string joined = "invalid experiment config:";
    for (const std::string& e : errors) joined += "\n  - " + e;
    throw ValidationError(joined);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json doc;
  doc["schema"] = schema_path;
  doc["dataset"] = dataset_path;
  doc["kg"] = kg_path;
  doc["kg_strategy"] = to_string(kg_strategy);
  doc["pool"] = pool_path;
  doc["pool_size"] = pool_size;
  doc["train_count"] = train_count;
  doc["k_shot"] = train.k_shot;
  doc["selection"] = to_string(selection);
  doc["policy"] = {{"hidden_dim", train.hidden_dim},
                   {"learning_rate", train.learning_rate},
                   {"batch_size", train.batch_size},
                   {"epochs", train.epochs},
                   {"baseline", to_string(train.baseline)},
                   {"replacement", to_string(train.sampling)}};
  doc["reward"] = {{"lambda1", reward.lambda1}, {"lambda2", reward.lambda2}};
  doc["embedding"] = {
      {"backend",
       embedding.backend == EmbedderConfig::Backend::kHashed ? "hashed"
                                                             : "file"},
      {"dim", embedding.dim},
      {"table_path", embedding.table_path}};
  doc["llm"] = {
      {"backend",
       llm_backend == LlmBackendKind::kSimulated ? "simulated" : "http"},
      {"oracle",
       {{"p_hit", oracle.p_hit},
        {"p_fp", oracle.p_fp},
        {"boost", oracle.boost},
        {"seed", oracle.seed}}},
      {"http",
       {{"url", http.url},
        {"model", http.model},
        {"temperature", http.temperature},
        {"system_message", http.system_message},
        {"api_key_env", http.api_key_env},
        {"max_attempts", http.max_attempts},
        {"initial_backoff_ms", http.initial_backoff_ms},
        {"max_backoff_ms", http.max_backoff_ms},
        {"requests_per_second", http.requests_per_second},
        {"burst", http.burst},
        {"timeout_seconds", http.timeout_seconds}}},
      {"cache_dir", cache_dir}};
  doc["template"] = template_path;
  doc["seeds"] = seeds;
  doc["output_dir"] = output_dir;
  return doc;
}

std::string ExperimentConfig::echo_string() const { return to_json().dump(); }

namespace {

struct Context {
  LabelSchema schema;
  Dataset dataset;
  std::string kg_text;
  CandidatePool pool;
  std::unique_ptr<Embedder> embedder;
  PromptTemplate tmpl = PromptTemplate::defaults();
  RewardConfig reward;
};

Context build_context(const ExperimentConfig& cfg) {
  Context ctx;
  ctx.schema = LabelSchema::load(cfg.schema_path);
  ctx.dataset = load_reports(cfg.dataset_path, ctx.schema);
  if (cfg.kg_strategy != KgStrategy::kNone) {
    const KnowledgeGraph kg = load_kg(cfg.kg_path, ctx.schema);
    ctx.kg_text = serialize_kg(kg, cfg.kg_strategy);
  }
  ctx.pool = load_pool(cfg.pool_path, ctx.schema, cfg.pool_size);
  ctx.embedder = make_embedder(cfg.embedding);
  compute_pool_embeddings(ctx.pool, *ctx.embedder);
  if (!cfg.template_path.empty()) {
    ctx.tmpl = PromptTemplate::load(cfg.template_path);
  }
  ctx.reward = cfg.reward;
  ctx.reward.label_count = ctx.schema.count();
  if (cfg.selection != SelectionStrategy::kNone &&
      static_cast<std::size_t>(cfg.train.k_shot) > ctx.pool.size()) {
    throw ValidationError("k_shot " + std::to_string(cfg.train.k_shot) +
                          " exceeds the candidate pool size " +
                          std::to_string(ctx.pool.size()));
  }
  return ctx;
}

struct ClientBundle {
  std::unique_ptr<LlmClient> backend;
  std::unique_ptr<CachingLlmClient> caching;

  LlmClient& use() {
    return caching ? static_cast<LlmClient&>(*caching) : *backend;
  }
};

ClientBundle make_client(const ExperimentConfig& cfg, const Context& ctx,
                         std::uint64_t repetition_seed) {
  ClientBundle bundle;
  if (cfg.llm_backend == LlmBackendKind::kSimulated) {
    OracleConfig oracle = cfg.oracle;
    oracle.seed = derive_seed(repetition_seed, "oracle", cfg.oracle.seed);
    auto simulated = std::make_unique<SimulatedLlmClient>(
        oracle, ctx.schema, default_keyword_map(ctx.schema));
    simulated->register_dataset(ctx.dataset);
    bundle.backend = std::move(simulated);
  } else {
    bundle.backend = std::make_unique<HttpLlmClient>(cfg.http);
  }
  if (!cfg.cache_dir.empty()) {
    bundle.caching = std::make_unique<CachingLlmClient>(
        *bundle.backend, CompletionCache(cfg.cache_dir));
  }
  return bundle;
}

fs::path seed_dir_of(const ExperimentConfig& cfg, std::uint64_t seed) {
  return fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
}

nlohmann::json metrics_to_json(const MetricsReport& m) {
  return {{"exact_match", m.exact_match}, {"precision", m.precision},
          {"recall", m.recall},           {"f1", m.f1},
          {"hamming_loss", m.hamming_loss}, {"n", m.n}};
}

MetricsReport mean_of(
    const std::vector<std::pair<std::uint64_t, MetricsReport>>& per_seed) {
  MetricsReport mean;
  for (const auto& [seed, m] : per_seed) {
    mean.exact_match += m.exact_match;
    mean.precision += m.precision;
    mean.recall += m.recall;
    mean.f1 += m.f1;
    mean.hamming_loss += m.hamming_loss;
    mean.n = m.n;
  }
  const double n = static_cast<double>(per_seed.size());
  mean.exact_match /= n;
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  mean.hamming_loss /= n;
  return mean;
}

MetricsReport stddev_of(
    const std::vector<std::pair<std::uint64_t, MetricsReport>>& per_seed,
    const MetricsReport& mean) {
  MetricsReport sd;
  if (per_seed.size() < 2) return sd;
  for (const auto& [seed, m] : per_seed) {
    sd.exact_match += (m.exact_match - mean.exact_match) *
                      (m.exact_match - mean.exact_match);
    sd.precision += (m.precision - mean.precision) * (m.precision - mean.precision);
    sd.recall += (m.recall - mean.recall) * (m.recall - mean.recall);
    sd.f1 += (m.f1 - mean.f1) * (m.f1 - mean.f1);
    sd.hamming_loss += (m.hamming_loss - mean.hamming_loss) *
                       (m.hamming_loss - mean.hamming_loss);
  }
  const double denom = static_cast<double>(per_seed.size()) - 1.0;
  sd.exact_match = std::sqrt(sd.exact_match / denom);
  sd.precision = std::sqrt(sd.precision / denom);
  sd.recall = std::sqrt(sd.recall / denom);
  sd.f1 = std::sqrt(sd.f1 / denom);
  sd.hamming_loss = std::sqrt(sd.hamming_loss / denom);
  return sd;
}

void write_config_echo(const ExperimentConfig& cfg) {
  write_json_file(fs::path(cfg.output_dir) / "config_echo.json",
                  cfg.to_json());
}

}  // namespace

void run_train(const ExperimentConfig& cfg) {
  const Context ctx = build_context(cfg);
  if (cfg.train_count < 1) {
    throw ValidationError("training needs train_count >= 1");
  }
  fs::create_directories(cfg.output_dir);
  write_config_echo(cfg);
  for (const std::uint64_t seed : cfg.seeds) {
    const auto [train_split, test_split] =
        split_dataset(ctx.dataset, cfg.train_count, seed);
    TrainConfig train_config = cfg.train;
    train_config.seed = derive_seed(seed, "train");
    ClientBundle client = make_client(cfg, ctx, seed);

    const fs::path dir = seed_dir_of(cfg, seed);
    fs::create_directories(dir);
    std::ofstream history(dir / "history.jsonl",
                          std::ios::binary | std::ios::trunc);
    if (!history) {
      throw IoError("cannot write " + (dir / "history.jsonl").string());
    }
    const EpochSink sink = [&](const EpochRecord& record) {
      history << to_jsonl_record({{"epoch", record.epoch},
                                  {"mean_reward", record.mean_reward}})
              << "\n";
      history.flush();
    };
    const TrainResult result =
        train(train_config, ctx.reward, train_split, ctx.pool, ctx.kg_text,
              client.use(), *ctx.embedder, ctx.schema, ctx.tmpl, sink);
    result.params.save(dir / "params.json", cfg.echo_string());
    std::cout << "train seed " << seed << ": " << cfg.train.epochs
              << " epochs, final mean reward "
              << result.history.epochs.back().mean_reward << "\n";
  }
}

ResultsReport run_eval(const ExperimentConfig& cfg,
                       const std::optional<std::string>& params_path) {
  const auto started = std::chrono::steady_clock::now();
  const Context ctx = build_context(cfg);
  fs::create_directories(cfg.output_dir);
  write_config_echo(cfg);

  ResultsReport results;
  for (const std::uint64_t seed : cfg.seeds) {
    const auto [train_split, test_split] =
        split_dataset(ctx.dataset, cfg.train_count, seed);
    if (test_split.reports.empty()) {
      throw ValidationError("evaluation split is empty; lower train_count");
    }
    for (const Report& report : test_split.reports) {
      if (!report.labels) {
        throw ValidationError("evaluation report '" + report.id +
                              "' has no labels");
      }
    }
    ClientBundle client = make_client(cfg, ctx, seed);

    PolicyParams params;
    PredictOptions options;
    options.strategy = cfg.selection;
    options.k_shot = cfg.train.k_shot;
    options.seed = derive_seed(seed, "predict");
    if (cfg.selection == SelectionStrategy::kDynamic) {
      const fs::path path = params_path
                                ? fs::path(*params_path)
                                : seed_dir_of(cfg, seed) / "params.json";
      if (!fs::exists(path)) {
        throw ValidationError("no trained policy parameters at " +
                              path.string() +
                              "; run `cohort train` first or pass --params");
      }
      params = PolicyParams::load(path);
      if (params.embed_dim() != ctx.embedder->dim()) {
        throw ValidationError(
            "policy parameters at " + path.string() + " expect embedding dim " +
            std::to_string(params.embed_dim()) + " but the embedder yields " +
            std::to_string(ctx.embedder->dim()));
      }
      options.params = &params;
    }

    const fs::path dir = seed_dir_of(cfg, seed);
    fs::create_directories(dir);
    std::ofstream predictions_out(dir / "predictions.jsonl",
                                  std::ios::binary | std::ios::trunc);
    if (!predictions_out) {
      throw IoError("cannot write " + (dir / "predictions.jsonl").string());
    }
    const PredictionSink sink = [&](const Prediction& p) {
      predictions_out << to_jsonl_record({{"report_id", p.report_id},
                                          {"predicted", p.predicted.indices()},
                                          {"truth", p.truth.indices()},
                                          {"parse_ok", p.parse_ok}})
                      << "\n";
      predictions_out.flush();
    };
    const std::vector<Prediction> predictions =
        predict_batch(test_split.reports, options, ctx.pool, ctx.kg_text,
                      client.use(), *ctx.embedder, ctx.schema, ctx.tmpl, sink);
    const MetricsReport metrics =
        compute_metrics(predictions, ctx.schema.count());
    nlohmann::json seed_doc = metrics_to_json(metrics);
    seed_doc["seed"] = seed;
    seed_doc["config"] = cfg.to_json();
    write_json_file(dir / "metrics.json", seed_doc);
    results.per_seed.emplace_back(seed, metrics);
    std::cout << "eval seed " << seed << ": f1 " << metrics.f1 << ", exact "
              << metrics.exact_match << " over " << metrics.n << " reports\n";
  }

  results.mean = mean_of(results.per_seed);
  results.stddev = stddev_of(results.per_seed, results.mean);
  results.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  nlohmann::json aggregate;
  aggregate["config"] = cfg.to_json();
  aggregate["mean"] = metrics_to_json(results.mean);
  aggregate["std"] = metrics_to_json(results.stddev);
  aggregate["per_seed"] = nlohmann::json::array();
  for (const auto& [seed, metrics] : results.per_seed) {
    nlohmann::json entry = metrics_to_json(metrics);
    entry["seed"] = seed;
    aggregate["per_seed"].push_back(std::move(entry));
  }
  write_json_file(fs::path(cfg.output_dir) / "metrics.json", aggregate);
  aggregate["elapsed_seconds"] = results.elapsed_seconds;
  write_json_file(fs::path(cfg.output_dir) / "results.json", aggregate);
  return results;
}

namespace {

int parse_int_value(const std::string& text, const std::string& axis) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ValidationError("ablation axis " + axis +
                          " needs integer values; got '" + text + "'");
  }
}

void apply_axis_value(ExperimentConfig& cfg, const std::string& axis,
                      const std::string& value) {
  if (axis == "kg_strategy") {
    cfg.kg_strategy = kg_strategy_from_string(value);
  } else if (axis == "train_count") {
    cfg.train_count = parse_int_value(value, axis);
  } else if (axis == "pool_size") {
    cfg.pool_size = parse_int_value(value, axis);
  } else if (axis == "k_shot") {
    cfg.train.k_shot = parse_int_value(value, axis);
  } else if (axis == "selection") {
    cfg.selection = selection_strategy_from_string(value);
  } else {
    throw ValidationError(
        "unknown ablation axis '" + axis +
        "' (expected kg_strategy|train_count|pool_size|k_shot|selection)");
  }
}

std::string sanitize_component(const std::string& value) {
  std::string out;
  for (char c : value) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                          c == '_'
                      ? c
                      : '_');
  }
  return out.empty() ? "_" : out;
}

std::string format_mean_std(double mean, double std) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f ± %.4f", mean, std);
  return buffer;
}

// Mean final-epoch reward across seeds, from the history files a dynamic run
// leaves behind.
std::pair<double, double> final_reward_stats(const ExperimentConfig& cfg) {
  std::vector<double> finals;
  for (const std::uint64_t seed : cfg.seeds) {
    const TrainHistory history =
        load_history(seed_dir_of(cfg, seed) / "history.jsonl");
    if (history.epochs.empty()) {
      throw ValidationError("empty training history for seed " +
                            std::to_string(seed));
    }
    finals.push_back(history.epochs.back().mean_reward);
  }
  double mean = 0.0;
  for (double v : finals) mean += v;
  mean /= static_cast<double>(finals.size());
  double var = 0.0;
  if (finals.size() > 1) {
    for (double v : finals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(finals.size()) - 1.0;
  }
  return {mean, std::sqrt(var)};
}

}  // namespace

void run_ablation(const ExperimentConfig& cfg, const std::string& axis,
                  const std::vector<std::string>& values) {
  if (values.empty()) {
    throw ValidationError("ablation needs at least one axis value");
  }
  struct Row {
    std::string value;
    MetricsReport mean;
    MetricsReport stddev;
    std::optional<std::pair<double, double>> final_reward;
  };
  std::vector<Row> rows;
  for (const std::string& value : values) {
    ExperimentConfig sub = cfg;
    apply_axis_value(sub, axis, value);
    sub.output_dir = (fs::path(cfg.output_dir) / ("ablation_" + axis) /
                      sanitize_component(value))
                         .string();
    std::cout << "ablation " << axis << " = " << value << "\n";
    Row row;
    row.value = value;
    if (sub.selection == SelectionStrategy::kDynamic) {
      run_train(sub);
      row.final_reward = final_reward_stats(sub);
    }
    const ResultsReport results = run_eval(sub);
    row.mean = results.mean;
    row.stddev = results.stddev;
    rows.push_back(std::move(row));
  }

  std::string csv = axis + ",exact_match,precision,recall,f1,hamming_loss\n";
  for (const Row& row : rows) {
    csv += row.value;
    csv += "," + format_mean_std(row.mean.exact_match, row.stddev.exact_match);
    csv += "," + format_mean_std(row.mean.precision, row.stddev.precision);
    csv += "," + format_mean_std(row.mean.recall, row.stddev.recall);
    csv += "," + format_mean_std(row.mean.f1, row.stddev.f1);
    csv += "," + format_mean_std(row.mean.hamming_loss, row.stddev.hamming_loss);
    csv += "\n";
  }
  write_text_file(fs::path(cfg.output_dir) / ("ablation_" + axis + ".csv"),
                  csv);

  nlohmann::json plot;
  plot["axis"] = axis;
  plot["values"] = values;
  auto series = [&rows](auto pick_mean, auto pick_std) {
    nlohmann::json out;
    out["mean"] = nlohmann::json::array();
    out["std"] = nlohmann::json::array();
    for (const Row& row : rows) {
      out["mean"].push_back(pick_mean(row));
      out["std"].push_back(pick_std(row));
    }
    return out;
  };
  plot["series"] = {
      {"exact_match",
       series([](const Row& r) { return r.mean.exact_match; },
              [](const Row& r) { return r.stddev.exact_match; })},
      {"precision", series([](const Row& r) { return r.mean.precision; },
                           [](const Row& r) { return r.stddev.precision; })},
      {"recall", series([](const Row& r) { return r.mean.recall; },
                        [](const Row& r) { return r.stddev.recall; })},
      {"f1", series([](const Row& r) { return r.mean.f1; },
                    [](const Row& r) { return r.stddev.f1; })},
      {"hamming_loss",
       series([](const Row& r) { return r.mean.hamming_loss; },
              [](const Row& r) { return r.stddev.hamming_loss; })}};
  if (std::all_of(rows.begin(), rows.end(),
                  [](const Row& r) { return r.final_reward.has_value(); })) {
    nlohmann::json reward;
    reward["mean"] = nlohmann::json::array();
    reward["std"] = nlohmann::json::array();
    for (const Row& row : rows) {
      reward["mean"].push_back(row.final_reward->first);
      reward["std"].push_back(row.final_reward->second);
    }
    plot["series"]["final_reward"] = std::move(reward);
  }
  write_json_file(
      fs::path(cfg.output_dir) / ("ablation_" + axis + "_plot.json"), plot);
}

std::string render_prompt(const ExperimentConfig& cfg,
                          const std::string& report_id,
                          const std::optional<std::string>& params_path) {
  const Context ctx = build_context(cfg);
  const Report* found = nullptr;
  for (const Report& report : ctx.dataset.reports) {
    if (report.id == report_id) {
      found = &report;
      break;
    }
  }
  if (found == nullptr) {
    throw ValidationError("no report with id '" + report_id + "' in " +
                          cfg.dataset_path);
  }
  const std::uint64_t seed = cfg.seeds.front();

  std::vector<int> selection;
  switch (cfg.selection) {
    case SelectionStrategy::kNone:
      break;
    case SelectionStrategy::kRandom: {
      SplitMix64 rng(
          derive_seed(derive_seed(seed, "predict"), "predict-random"));
      selection = select_random(ctx.pool, cfg.train.k_shot, rng);
      break;
    }
    case SelectionStrategy::kManual:
      selection = select_manual(ctx.pool, cfg.train.k_shot);
      break;
    case SelectionStrategy::kMostSimilar:
      selection = select_most_similar(
          ctx.pool, ctx.embedder->embed(found->id, found->text),
          cfg.train.k_shot);
      break;
    case SelectionStrategy::kDynamic: {
      const fs::path path = params_path
                                ? fs::path(*params_path)
                                : seed_dir_of(cfg, seed) / "params.json";
      if (!fs::exists(path)) {
        throw ValidationError("no trained policy parameters at " +
                              path.string() +
                              "; run `cohort train` first or pass --params");
      }
      const PolicyParams params = PolicyParams::load(path);
      const SelectionDistribution dist = selection_distribution(
          params, ctx.embedder->embed(found->id, found->text), ctx.pool);
      selection = select_greedy_topk(dist, cfg.train.k_shot);
      break;
    }
  }
  std::vector<CotSample> exemplars;
  for (int j : selection) {
    exemplars.push_back(ctx.pool.samples[static_cast<std::size_t>(j)]);
  }
  return build_prompt(ctx.schema, ctx.kg_text, exemplars, *found, ctx.tmpl)
      .text;
}

}  // namespace cohort
