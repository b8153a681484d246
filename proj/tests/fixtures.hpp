#pragma once

#include <random>

#include "grpo/objective.hpp"
#include "grpo/policy_env.hpp"

namespace fixture {

inline grpo::PolicyParams jitter(grpo::PolicyParams p, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for (double& v : p.values()) v += n(rng);
  return p;
}

struct Instance {
  grpo::PolicyParams current;
  grpo::PolicyParams old;
  grpo::PolicyParams ref;
  grpo::RolloutGroup group;
};

// A small random group: rollouts sampled from `old`, log-probs replayed under old/ref,
// random advantages. `drift` controls how far current and ref sit from old.
inline Instance random_instance(const grpo::Environment& env, std::mt19937_64& rng, int G,
                                double drift) {
  Instance inst;
  inst.old = jitter(env.make_policy(), rng, 1.0);
  inst.current = jitter(inst.old, rng, drift);
  inst.ref = jitter(inst.old, rng, drift);
  inst.group.task = grpo::sample_task(env, rng);
  std::normal_distribution<double> adv(0.0, 1.0);
  for (int i = 0; i < G; ++i) {
    grpo::Rollout r = grpo::sample_response(inst.old, env, inst.group.task, rng, 12);
    r.logp_old = grpo::replay_logprob(inst.old, r);
    r.logp_ref = grpo::replay_logprob(inst.ref, r);
    r.logp_new = grpo::replay_logprob(inst.current, r);
    inst.group.rollouts.push_back(std::move(r));
    inst.group.advantages.push_back(adv(rng));
    inst.group.rewards.push_back(0.0);
  }
  return inst;
}

}  // namespace fixture
