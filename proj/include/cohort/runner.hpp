#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cohort/embedding.hpp"
#include "cohort/evaluation.hpp"
#include "cohort/http_llm.hpp"
#include "cohort/knowledge_graph.hpp"
#include "cohort/oracle.hpp"
#include "cohort/policy.hpp"

namespace cohort {

enum class LlmBackendKind { kSimulated, kHttp };

// A fully resolved experiment description. Loading applies defaults and
// validates everything it can see, reporting all problems in one error.
struct ExperimentConfig {
  std::string schema_path;
  std::string dataset_path;
  std::string kg_path;  // may stay empty with kg_strategy none
  KgStrategy kg_strategy = KgStrategy::kRule;
  std::string pool_path;
  int pool_size = 0;  // 0 = whole pool; otherwise first-N cap
  int train_count = 0;
  SelectionStrategy selection = SelectionStrategy::kDynamic;
  TrainConfig train;  // .seed is overridden per repetition at run time
  RewardConfig reward;
  EmbedderConfig embedding;
  LlmBackendKind llm_backend = LlmBackendKind::kSimulated;
  OracleConfig oracle;
  HttpLlmConfig http;
  std::string cache_dir;     // empty = response cache off
  std::string template_path; // empty = built-in prompt layout
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  // Normalized echo: every field with defaults applied. Feeding the echo
  // back through load() reproduces the run (same working directory).
  nlohmann::json to_json() const;
  std::string echo_string() const;
};

struct ResultsReport {
  std::vector<std::pair<std::uint64_t, MetricsReport>> per_seed;
  MetricsReport mean;
  MetricsReport stddev;  // sample standard deviation over seeds (0 if one)
  double elapsed_seconds = 0.0;
};

// Trains one policy per seed; writes under <output_dir>/seed_<s>/ the files
// params.json and history.jsonl (streamed per epoch), plus
// <output_dir>/config_echo.json.
void run_train(const ExperimentConfig& config);

// Evaluates the configured selection strategy per seed; writes per-seed
// predictions.jsonl and metrics.json, the aggregate <output_dir>/metrics.json
// (timing-free, byte-reproducible) and <output_dir>/results.json (with
// timing). params_path overrides where dynamic-policy parameters are loaded
// from (otherwise each seed uses its own trained params.json).
ResultsReport run_eval(const ExperimentConfig& config,
                       const std::optional<std::string>& params_path = {});

// Re-runs train (for the dynamic strategy) and eval per axis value under
// <output_dir>/ablation_<axis>/<value>/ and writes ablation_<axis>.csv
// (mean ± std table) plus ablation_<axis>_plot.json (plot-ready series).
void run_ablation(const ExperimentConfig& config, const std::string& axis,
                  const std::vector<std::string>& values);

// Assembles and returns the prompt the given report would receive. For the
// dynamic strategy, policy parameters come from params_path or from the
// first seed's training artifacts.
std::string render_prompt(const ExperimentConfig& config,
                          const std::string& report_id,
                          const std::optional<std::string>& params_path = {});

}  // namespace cohort
