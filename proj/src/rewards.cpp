#include "grpo/rewards.hpp"

#include <algorithm>
#include <cctype>

#include "grpo/errors.hpp"

namespace grpo {

void RewardConfig::validate() const {
  if (!(r0 > 0.0)) throw ConfigError("reward.r0 must be > 0");
  if (!(r1 >= 0.0)) throw ConfigError("reward.r1 must be >= 0");
  if (!(r2 > 0.0)) throw ConfigError("reward.r2 must be > 0");
  if (max_length <= 0) throw ConfigError("reward.ML must be > 0");
  if (option_set.empty()) throw ConfigError("reward.option_set must not be empty");
  for (std::size_t i = 0; i < option_set.size(); ++i) {
    const auto c = static_cast<unsigned char>(option_set[i]);
    if (!std::isupper(c)) throw ConfigError("reward.option_set must hold uppercase letters");
    if (option_set.find(option_set[i], i + 1) != std::string::npos) {
      throw ConfigError("reward.option_set has a duplicate letter");
    }
  }
}

double length_reward(int len, const RewardConfig& cfg) {
  if (cfg.max_length <= 0) throw ConfigError("length_reward: ML must be > 0");
  if (len < 0) throw InvalidArgument("length_reward: negative length");
  const double fraction =
      std::min(1.0, static_cast<double>(len) / static_cast<double>(cfg.max_length));
  return fraction * cfg.r1;
}

double format_reward(const ParseResult& parsed, const RewardConfig& cfg) {
  if (!parsed.format_ok) return 0.0;
  return cfg.r0 + length_reward(think_length(parsed), cfg);
}

double accuracy_reward(std::optional<char> extracted, char label, const RewardConfig& cfg) {
  if (cfg.option_set.find(label) == std::string::npos) {
    throw InvalidArgument(std::string("accuracy_reward: label '") + label +
                          "' is not a valid option");
  }
  return extracted && *extracted == label ? cfg.r2 : 0.0;
}

double total_reward(double format, double accuracy, const RewardConfig& cfg) {
  if (!cfg.incorrect_penalty) return accuracy + format;
  if (format <= 0.0) return -(cfg.r0 + cfg.r1 + cfg.r2);
  if (accuracy > 0.0) return accuracy + format;
  return -format;
}

RewardBreakdown score_response(std::string_view text, char label, const RewardConfig& cfg) {
  const ParseResult parsed = parse_response(text);
  RewardBreakdown out;
  out.format_ok = parsed.format_ok;
  out.think_len = think_length(parsed);
  out.length_reward = parsed.format_ok ? length_reward(out.think_len, cfg) : 0.0;
  out.format_reward = format_reward(parsed, cfg);
  out.accuracy_reward = accuracy_reward(extract_answer(parsed, cfg.option_set), label, cfg);
  out.correct = out.accuracy_reward > 0.0;
  out.total = total_reward(out.format_reward, out.accuracy_reward, cfg);
  return out;
}

}  // namespace grpo
