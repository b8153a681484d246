#pragma once

#include <vector>

#include "grpo/policy_env.hpp"

namespace grpo {

struct ObjectiveConfig {
  double epsilon = 0.2;
  double beta = 0.04;
  bool length_normalize = true;  // false drops the 1/|o_i| weight (Dr. GRPO)

  void validate() const;
};

/// G responses to one question together with their rewards and advantages.
/// Every rollout must carry logp_old and logp_ref of its own length.
struct RolloutGroup {
  Task task;
  std::vector<Rollout> rollouts;
  std::vector<RewardBreakdown> scores;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

struct GroupEvaluation {
  double objective = 0.0;
  std::vector<double> grad;  // empty for value-only evaluation
  std::vector<double> per_rollout_surrogate;
  std::vector<double> per_rollout_kl;
};

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)
double clipped_surrogate(double ratio, double advantage, double epsilon);

/// exp(d) - d - 1 with d = logp_ref - logp_new; non-negative, zero iff equal.
double kl_token(double logp_new, double logp_ref);

/// Group objective using the logp_new stored on each rollout.
///
///   J = 1/G sum_i n_i sum_t [ clipped_surrogate(exp(new - old), A_i) - beta * kl_token ]
///
/// with n_i = 1/|o_i| when length_normalize is set and 1 otherwise. Ratios and clipping
/// are per token.
GroupEvaluation grpo_objective(const RolloutGroup& group, const ObjectiveConfig& cfg);

/// Same objective with logp_new recomputed from `policy`, plus its exact gradient with
/// respect to every logit. Old/reference log-probs and advantages are held constant.
GroupEvaluation grpo_gradient(const RolloutGroup& group, const PolicyParams& policy,
                              const ObjectiveConfig& cfg);

}  // namespace grpo
