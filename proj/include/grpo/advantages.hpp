#pragma once

#include <random>
#include <span>
#include <vector>

namespace grpo {

struct AdvantageConfig {
  double noise_std = 0.02;
  bool noise_enabled = true;
  bool std_normalize = true;  // false drops the std division (Dr. GRPO)
  double std_floor = 1e-8;

  void validate() const;
};

/// Population standard deviation (divides by n).
double population_std(std::span<const double> values);

/// Group-relative advantages before noise: (r - mean) / std, or r - mean when
/// `std_normalize` is off. Groups whose std is below `std_floor` get all zeros.
std::vector<double> base_advantages(std::span<const double> rewards, const AdvantageConfig& cfg);

/// base_advantages plus, when enabled, an independent N(0, noise_std^2) draw per entry.
/// Throws InvalidArgument for groups of fewer than two rewards.
std::vector<double> group_advantages(std::span<const double> rewards, const AdvantageConfig& cfg,
                                     std::mt19937_64& rng);

}  // namespace grpo
