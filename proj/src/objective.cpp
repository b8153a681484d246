#include "grpo/objective.hpp"

#include <algorithm>
#include <cmath>

#include "grpo/errors.hpp"

namespace grpo {
namespace {

void check_group(const RolloutGroup& group) {
  if (group.rollouts.empty()) throw InvalidArgument("grpo objective: empty group");
  if (group.advantages.size() != group.rollouts.size()) {
    throw InvalidArgument("grpo objective: one advantage per rollout required");
  }
  for (const Rollout& r : group.rollouts) {
    if (r.length() == 0) throw InvalidArgument("grpo objective: empty rollout");
    if (r.logp_old.size() != r.length() || r.logp_ref.size() != r.length()) {
      throw InvalidArgument("grpo objective: rollout is missing old/ref log-probs");
    }
  }
}

// Shared by the value-only and value+gradient paths. `logp_new` is looked up per rollout;
// when `policy` is set the per-token weight on the score function is accumulated.
template <typename NewLogp>
GroupEvaluation evaluate(const RolloutGroup& group, const ObjectiveConfig& cfg, NewLogp logp_new,
                         const PolicyParams* policy) {
  cfg.validate();
  check_group(group);
  const std::size_t g = group.rollouts.size();
  const double inv_g = 1.0 / static_cast<double>(g);

  GroupEvaluation out;
  out.per_rollout_surrogate.assign(g, 0.0);
  out.per_rollout_kl.assign(g, 0.0);
  if (policy) out.grad.assign(policy->size(), 0.0);

  for (std::size_t i = 0; i < g; ++i) {
    const Rollout& r = group.rollouts[i];
    const double adv = group.advantages[i];
    const double n_i = cfg.length_normalize ? 1.0 / static_cast<double>(r.length()) : 1.0;
    double surrogate = 0.0;
    double kl = 0.0;
    for (std::size_t t = 0; t < r.length(); ++t) {
      const double lp = logp_new(i, t);
      const double ratio = std::exp(lp - r.logp_old[t]);
      const double clipped = std::clamp(ratio, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
      surrogate += std::min(ratio * adv, clipped * adv);
      kl += kl_token(lp, r.logp_ref[t]);
      if (policy) {
        // d/dlogp of the surrogate is ratio*A on the unclipped branch and 0 when the
        // clipped value is the smaller one; d/dlogp of -beta*kl is beta*(exp(ref-new) - 1).
        const double d_surr = ratio * adv <= clipped * adv ? ratio * adv : 0.0;
        const double d_kl = cfg.beta * (std::exp(r.logp_ref[t] - lp) - 1.0);
        const double weight = inv_g * n_i * (d_surr + d_kl);
        if (weight != 0.0) accumulate_score(*policy, r.states[t], r.tokens[t], weight, out.grad);
      }
    }
    out.per_rollout_surrogate[i] = n_i * surrogate;
    out.per_rollout_kl[i] = n_i * kl;
    out.objective += inv_g * (out.per_rollout_surrogate[i] - cfg.beta * out.per_rollout_kl[i]);
  }
  return out;
}

}  // namespace

void ObjectiveConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("objective.epsilon must be in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("objective.beta must be >= 0");
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_token(double logp_new, double logp_ref) {
  if (!std::isfinite(logp_new) || !std::isfinite(logp_ref)) {
    throw InvalidArgument("kl_token: non-finite log-probability");
  }
  const double d = logp_ref - logp_new;
  // expm1 keeps precision when d is tiny; the difference is never negative in exact math.
  return std::max(0.0, std::expm1(d) - d);
}

GroupEvaluation grpo_objective(const RolloutGroup& group, const ObjectiveConfig& cfg) {
  for (const Rollout& r : group.rollouts) {
    if (r.logp_new.size() != r.length()) {
      throw InvalidArgument("grpo_objective: rollout is missing logp_new");
    }
  }
  return evaluate(
      group, cfg,
      [&](std::size_t i, std::size_t t) { return group.rollouts[i].logp_new[t]; }, nullptr);
}

GroupEvaluation grpo_gradient(const RolloutGroup& group, const PolicyParams& policy,
                              const ObjectiveConfig& cfg) {
  std::vector<std::vector<double>> replayed;
  replayed.reserve(group.rollouts.size());
  for (const Rollout& r : group.rollouts) replayed.push_back(replay_logprob(policy, r));
  return evaluate(
      group, cfg, [&](std::size_t i, std::size_t t) { return replayed[i][t]; }, &policy);
}

}  // namespace grpo
