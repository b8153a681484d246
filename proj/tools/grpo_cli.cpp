// Command-line entry point: train, score, demo.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "grpo/harness.hpp"

namespace {

int run_train(const std::string& config_path, const std::string& preset,
              std::optional<std::uint64_t> seed, const std::string& out_path) {
  std::optional<grpo::Preset> override_preset;
  if (!preset.empty()) override_preset = grpo::parse_preset(preset);
  grpo::TrainConfig cfg = grpo::load_train_config(config_path, override_preset);
  if (seed) cfg.seed = *seed;

  const auto rows = grpo::train(cfg);
  grpo::emit_metrics(rows, out_path);
  const auto& last = rows.back();
  std::printf("preset=%s seed=%llu iterations=%zu -> %s\n",
              std::string(grpo::preset_name(cfg.preset)).c_str(),
              static_cast<unsigned long long>(cfg.seed), rows.size(), out_path.c_str());
  std::printf("final: think_len=%.3f accuracy_reward=%.3f format_reward=%.3f formatted=%.3f\n",
              last.mean_think_len, last.mean_accuracy_reward, last.mean_format_reward,
              last.frac_formatted);
  return 0;
}

int run_score(const std::string& in_path, const std::string& out_path,
              const std::string& config_path) {
  grpo::RewardConfig reward;
  if (!config_path.empty()) reward = grpo::load_train_config(config_path).reward;
  const auto summary = grpo::score_transcripts(in_path, out_path, reward);
  for (const auto& d : summary.diagnostics) std::cerr << in_path << ": " << d << '\n';
  std::printf("scored=%d formatted=%d correct=%d skipped=%d\n", summary.scored, summary.formatted,
              summary.correct, summary.skipped);
  return summary.skipped == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GRPO reward rules and training harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string metrics_out = "metrics.csv";
  auto* train = app.add_subcommand("train", "cold start + GRPO on the synthetic task");
  train->add_option("--config", config_path, "JSON training config")->required()
      ->check(CLI::ExistingFile);
  train->add_option("--preset", preset, "baseline|no_kl|dr_grpo|no_length_reward|no_penalty")
      ->check(CLI::IsMember({"baseline", "no_kl", "dr_grpo", "no_length_reward", "no_penalty"}));
  train->add_option("--seed", seed, "override the config seed");
  train->add_option("--out", metrics_out, "metrics CSV path");

  std::string score_in;
  std::string score_out;
  std::string score_config;
  auto* score = app.add_subcommand("score", "score a JSONL transcript file");
  score->add_option("--in", score_in, "input JSONL {id, response, label}")->required();
  score->add_option("--out", score_out, "output JSONL")->required();
  score->add_option("--config", score_config, "take reward constants from this config");

  bool print_prompt = false;
  auto* demo = app.add_subcommand("demo", "show the prompt template");
  demo->add_flag("--print-prompt", print_prompt, "print the templated sample question");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(config_path, preset, seed, metrics_out);
    if (*score) return run_score(score_in, score_out, score_config);
    if (*demo) {
      if (!print_prompt) {
        std::cerr << "demo: nothing to do (try --print-prompt)\n";
        return 1;
      }
      std::cout << grpo::build_prompt("What color is the cup?") << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
