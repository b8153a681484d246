#include "grpo/advantages.hpp"

#include <cmath>
#include <numeric>

#include "grpo/errors.hpp"

namespace grpo {
namespace {

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

void AdvantageConfig::validate() const {
  if (!(noise_std >= 0.0)) throw ConfigError("advantage.noise_std must be >= 0");
  if (!(std_floor > 0.0)) throw ConfigError("advantage.std_floor must be > 0");
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean = mean_of(values);
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(values.size()));
}

std::vector<double> base_advantages(std::span<const double> rewards, const AdvantageConfig& cfg) {
  if (rewards.size() < 2) throw InvalidArgument("group_advantages: group size must be >= 2");
  const double mean = mean_of(rewards);
  std::vector<double> adv(rewards.size(), 0.0);
  if (!cfg.std_normalize) {
    for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = rewards[i] - mean;
    return adv;
  }
  const double sd = population_std(rewards);
  if (sd < cfg.std_floor) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

std::vector<double> group_advantages(std::span<const double> rewards, const AdvantageConfig& cfg,
                                     std::mt19937_64& rng) {
  std::vector<double> adv = base_advantages(rewards, cfg);
  if (cfg.noise_enabled && cfg.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& a : adv) a += noise(rng);
  }
  return adv;
}

}  // namespace grpo
