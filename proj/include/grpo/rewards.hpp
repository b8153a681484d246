#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "grpo/formatting.hpp"

namespace grpo {

/// Reward-rule constants.
///
/// Defaults give the accuracy reward the same weight as the largest possible format
/// reward (r2 == r0 + r1). `incorrect_penalty == false` switches the total reward to the
/// plain sum AR + FR, which is the no-penalty ablation.
struct RewardConfig {
  double r0 = 0.5;           // base format reward
  double r1 = 0.5;           // cap of the continuous length reward
  double r2 = 1.0;           // accuracy reward
  int max_length = 20;       // think words at which the length reward saturates
  std::string option_set = std::string(kDefaultOptions);
  bool incorrect_penalty = true;

  void validate() const;
};

struct RewardBreakdown {
  double format_reward = 0.0;
  double length_reward = 0.0;
  double accuracy_reward = 0.0;
  double total = 0.0;
  int think_len = 0;
  bool format_ok = false;
  bool correct = false;
};

/// min(1, len / max_length) * r1. Throws ConfigError when max_length <= 0.
double length_reward(int len, const RewardConfig& cfg);

/// r0 + length_reward(think_len) for a well-formed response, 0 otherwise.
double format_reward(const ParseResult& parsed, const RewardConfig& cfg);

/// r2 when `extracted` equals `label`, else 0. Throws InvalidArgument for a label
/// outside the option set.
double accuracy_reward(std::optional<char> extracted, char label, const RewardConfig& cfg);

/// Combines the two components. With the penalty enabled a wrong answer costs its
/// format reward and a malformed response costs -(r0 + r1 + r2).
double total_reward(double format, double accuracy, const RewardConfig& cfg);

RewardBreakdown score_response(std::string_view text, char label, const RewardConfig& cfg);

}  // namespace grpo
