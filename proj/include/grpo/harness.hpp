#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "grpo/advantages.hpp"
#include "grpo/objective.hpp"
#include "grpo/policy_env.hpp"
#include "grpo/rewards.hpp"

namespace grpo {

enum class Preset { kBaseline, kNoKl, kDrGrpo, kNoLengthReward, kNoPenalty };

std::string_view preset_name(Preset preset);
Preset parse_preset(std::string_view name);

struct ColdStartConfig {
  int steps = 200;
  double learning_rate = 0.5;
  int num_demos = 16;
};

struct TrainConfig {
  int G = 8;
  int iterations = 300;
  int groups_per_iteration = 16;
  double learning_rate = 20.0;
  std::uint64_t seed = 7;
  Preset preset = Preset::kBaseline;
  RewardConfig reward;
  AdvantageConfig advantage;
  ObjectiveConfig objective;
  EnvConfig env;
  ColdStartConfig cold_start;

  void validate() const;
};

/// Returns `cfg` with the flags of `preset` applied and `cfg.preset` set.
/// Baseline leaves every flag as configured.
TrainConfig apply_preset(TrainConfig cfg, Preset preset);

struct MetricsRow {
  int iteration = 0;
  double mean_think_len = 0.0;
  double mean_accuracy_reward = 0.0;
  double mean_format_reward = 0.0;
  double frac_formatted = 0.0;
  double frac_correct = 0.0;
  double objective_value = 0.0;
};

inline constexpr std::string_view kMetricsHeader =
    "iteration,mean_think_len,mean_accuracy_reward,mean_format_reward,frac_formatted,"
    "frac_correct,objective_value";

// ---------------------------------------------------------------------------
// Cold start

struct Demo {
  Task task;
  std::vector<int> tokens;
};

/// Formatted demonstrations cycling over the questions. Think spans hold 1-4 filler
/// words and the answer letters rotate through the option set, so the demos teach the
/// response format without revealing the answer key.
std::vector<Demo> make_cold_start_demos(const Environment& env, int count);

/// Mean over demos of sum_t log pi(a_t | s_t).
double demo_log_likelihood(const PolicyParams& policy, const Environment& env,
                           const std::vector<Demo>& demos);

/// Full-batch gradient ascent on the mean demo log-likelihood.
/// Throws InvalidArgument if any demo does not render to a well-formed response, and
/// std::logic_error if a positive number of steps fails to raise the likelihood.
PolicyParams cold_start(PolicyParams policy, const Environment& env,
                        const std::vector<Demo>& demos, int steps, double lr);

/// Fraction of `samples` sampled responses that pass the format check.
double sampled_format_rate(const PolicyParams& policy, const Environment& env, int samples,
                           std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Training

/// Per-iteration trace for observers. The snapshot checksums are taken when the old
/// policy is frozen and again just before the update is applied.
struct IterationTrace {
  int iteration = 0;
  std::size_t old_checksum_at_snapshot = 0;
  std::size_t old_checksum_at_update = 0;
  std::size_t ref_checksum = 0;
};

struct TrainHooks {
  std::function<void(const IterationTrace&)> on_iteration;
};

/// Builds one group: samples G responses, replays old/ref log-probs, scores and
/// computes advantages.
RolloutGroup build_group(const PolicyParams& old_policy, const PolicyParams& ref_policy,
                         const Environment& env, const TrainConfig& cfg, std::mt19937_64& rng);

/// Random stream for (seed, iteration, group).
std::mt19937_64 group_stream(std::uint64_t seed, int iteration, int group);

/// Cold start followed by GRPO. One ascent step per iteration.
std::vector<MetricsRow> train(const TrainConfig& cfg, const TrainHooks& hooks = {});

// ---------------------------------------------------------------------------
// Persistence

std::string format_metrics_csv(const std::vector<MetricsRow>& rows);
void emit_metrics(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

/// Reads a JSON config whose keys mirror TrainConfig (nested objects for reward,
/// advantage, objective, env and cold_start). Missing keys keep their defaults; unknown
/// keys are rejected with ConfigError. The preset named in the file, or
/// `preset_override` when given, is applied to the result.
TrainConfig parse_train_config(std::string_view json_text,
                               std::optional<Preset> preset_override = std::nullopt);
TrainConfig load_train_config(const std::filesystem::path& path,
                              std::optional<Preset> preset_override = std::nullopt);

struct TranscriptSummary {
  int scored = 0;
  int formatted = 0;
  int correct = 0;
  int skipped = 0;
  std::vector<std::string> diagnostics;  // "line N: reason"
};

/// Scores a line-delimited JSON file of {id, response, label} records and writes one
/// {id, format_ok, think_len, FR, LR, AR, R} record per valid input line. Bad lines are
/// skipped and reported. Throws IoError if either file cannot be opened.
TranscriptSummary score_transcripts(const std::filesystem::path& input,
                                    const std::filesystem::path& output, const RewardConfig& cfg);

}  // namespace grpo
