#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cohort/errors.hpp"
#include "cohort/runner.hpp"

namespace {

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> values;
  std::string current;
  for (char c : csv) {
    if (c == ',') {
      if (!current.empty()) values.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) values.push_back(current);
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cohort: optimized few-shot prompting for multi-label medical report "
      "classification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string params_path;
  std::string axis;
  std::string values_csv;
  std::string report_id;

  CLI::App* train_cmd =
      app.add_subcommand("train", "train the exemplar-selection policy");
  train_cmd->add_option("-c,--config", config_path, "experiment config JSON")
      ->required();

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate the configured strategy");
  eval_cmd->add_option("-c,--config", config_path, "experiment config JSON")
      ->required();
  eval_cmd->add_option("--params", params_path,
                       "policy parameters file (overrides per-seed files)");

  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "sweep one config axis and tabulate");
  ablate_cmd->add_option("-c,--config", config_path, "experiment config JSON")
      ->required();
  ablate_cmd
      ->add_option("--axis", axis,
                   "kg_strategy|train_count|pool_size|k_shot|selection")
      ->required();
  ablate_cmd->add_option("--values", values_csv, "comma-separated axis values")
      ->required();

  CLI::App* prompt_cmd =
      app.add_subcommand("prompt", "print the assembled prompt for a report");
  prompt_cmd->add_option("-c,--config", config_path, "experiment config JSON")
      ->required();
  prompt_cmd->add_option("--report-id", report_id, "report id to render")
      ->required();
  prompt_cmd->add_option("--params", params_path,
                         "policy parameters file (dynamic strategy)");

  CLI11_PARSE(app, argc, argv);

  try {
    const cohort::ExperimentConfig config =
        cohort::ExperimentConfig::load(config_path);
    const std::optional<std::string> params =
        params_path.empty() ? std::nullopt
                            : std::optional<std::string>(params_path);
    if (train_cmd->parsed()) {
      cohort::run_train(config);
    } else if (eval_cmd->parsed()) {
      cohort::run_eval(config, params);
    } else if (ablate_cmd->parsed()) {
      cohort::run_ablation(config, axis, split_values(values_csv));
    } else if (prompt_cmd->parsed()) {
      std::cout << cohort::render_prompt(config, report_id, params) << "\n";
    }
  } catch (const cohort::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cohort::AnswerParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cohort::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cohort::TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const cohort::ApiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
