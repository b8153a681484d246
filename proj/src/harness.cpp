#include "grpo/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "grpo/errors.hpp"

namespace grpo {

std::string_view preset_name(Preset preset) {
  switch (preset) {
    case Preset::kBaseline: return "baseline";
    case Preset::kNoKl: return "no_kl";
    case Preset::kDrGrpo: return "dr_grpo";
    case Preset::kNoLengthReward: return "no_length_reward";
    case Preset::kNoPenalty: return "no_penalty";
  }
  return "baseline";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : {Preset::kBaseline, Preset::kNoKl, Preset::kDrGrpo, Preset::kNoLengthReward,
                   Preset::kNoPenalty}) {
    if (preset_name(p) == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (G < 2) throw ConfigError("G must be >= 2");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (groups_per_iteration < 1) throw ConfigError("groups_per_iteration must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (cold_start.steps < 0) throw ConfigError("cold_start.steps must be >= 0");
  if (!(cold_start.learning_rate > 0.0)) throw ConfigError("cold_start.learning_rate must be > 0");
  if (cold_start.num_demos < 0) throw ConfigError("cold_start.num_demos must be >= 0");
  reward.validate();
  advantage.validate();
  objective.validate();
  env.validate();
}

TrainConfig apply_preset(TrainConfig cfg, Preset preset) {
  cfg.preset = preset;
  switch (preset) {
    case Preset::kBaseline:
      break;
    case Preset::kNoKl:
      cfg.objective.beta = 0.0;
      break;
    case Preset::kDrGrpo:
      cfg.objective.beta = 0.0;
      cfg.objective.length_normalize = false;
      cfg.advantage.std_normalize = false;
      break;
    case Preset::kNoLengthReward:
      cfg.reward.r1 = 0.0;
      break;
    case Preset::kNoPenalty:
      cfg.reward.incorrect_penalty = false;
      break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Cold start

std::vector<Demo> make_cold_start_demos(const Environment& env, int count) {
  const Vocab& vocab = env.vocab();
  const int q_count = env.config().num_questions;
  std::vector<Demo> demos;
  demos.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    Demo d;
    d.task.q_id = i % q_count;
    d.task.correct_option = env.answer_for(d.task.q_id);
    d.task.question_text = build_prompt("Question " + std::to_string(d.task.q_id) +
                                        ": choose the correct option.");
    std::vector<int> fillers;
    for (int j = 0; j < 1 + i % 4; ++j) fillers.push_back((i + j) % vocab.num_fillers());
    const char letter = vocab.text(vocab.option((i / q_count) % vocab.num_options()))[0];
    d.tokens = env.canonical_response(fillers, letter);
    demos.push_back(std::move(d));
  }
  return demos;
}

double demo_log_likelihood(const PolicyParams& policy, const Environment& env,
                           const std::vector<Demo>& demos) {
  if (demos.empty()) return 0.0;
  double total = 0.0;
  for (const Demo& d : demos) {
    const std::vector<int> states = env.walk(d.task.q_id, d.tokens);
    for (std::size_t t = 0; t < states.size(); ++t) total += policy.log_prob(states[t], d.tokens[t]);
  }
  return total / static_cast<double>(demos.size());
}

PolicyParams cold_start(PolicyParams policy, const Environment& env,
                        const std::vector<Demo>& demos, int steps, double lr) {
  std::vector<Rollout> traces;
  traces.reserve(demos.size());
  for (const Demo& d : demos) {
    const std::string text = env.vocab().detokenize(d.tokens);
    if (!parse_response(text).format_ok) {
      throw InvalidArgument("cold_start: demo for question " + std::to_string(d.task.q_id) +
                            " is not well-formed: \"" + text + "\"");
    }
    Rollout r;
    r.tokens = d.tokens;
    r.states = env.walk(d.task.q_id, d.tokens);
    traces.push_back(std::move(r));
  }
  if (steps <= 0 || demos.empty()) return policy;

  const double before = demo_log_likelihood(policy, env, demos);
  const double scale = lr / static_cast<double>(demos.size());
  std::vector<double> grad(policy.size());
  for (int step = 0; step < steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const Rollout& r : traces) {
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        accumulate_score(policy, r.states[t], r.tokens[t], 1.0, grad);
      }
    }
    auto theta = policy.values();
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += scale * grad[k];
  }
  const double after = demo_log_likelihood(policy, env, demos);
  if (!(after > before)) {
    throw std::logic_error("cold_start: demo log-likelihood did not increase");
  }
  return policy;
}

double sampled_format_rate(const PolicyParams& policy, const Environment& env, int samples,
                           std::mt19937_64& rng) {
  if (samples <= 0) return 0.0;
  int ok = 0;
  for (int s = 0; s < samples; ++s) {
    const Task task = sample_task(env, rng);
    const Rollout r = sample_response(policy, env, task, rng, env.config().tmax);
    if (parse_response(r.text).format_ok) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------
// Training

std::mt19937_64 group_stream(std::uint64_t seed, int iteration, int group) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(group)};
  return std::mt19937_64(seq);
}

RolloutGroup build_group(const PolicyParams& old_policy, const PolicyParams& ref_policy,
                         const Environment& env, const TrainConfig& cfg, std::mt19937_64& rng) {
  RolloutGroup group;
  group.task = sample_task(env, rng);
  group.rollouts.reserve(static_cast<std::size_t>(cfg.G));
  for (int i = 0; i < cfg.G; ++i) {
    Rollout r = sample_response(old_policy, env, group.task, rng, env.config().tmax);
    r.logp_old = replay_logprob(old_policy, r);
    r.logp_ref = replay_logprob(ref_policy, r);
    group.scores.push_back(score_response(r.text, group.task.correct_option, cfg.reward));
    group.rewards.push_back(group.scores.back().total);
    group.rollouts.push_back(std::move(r));
  }
  group.advantages = group_advantages(group.rewards, cfg.advantage, rng);
  return group;
}

std::vector<MetricsRow> train(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const Environment env(cfg.env, cfg.reward, cfg.seed);

  PolicyParams policy = env.make_policy();
  const std::vector<Demo> demos = make_cold_start_demos(env, cfg.cold_start.num_demos);
  policy = cold_start(std::move(policy), env, demos, cfg.cold_start.steps,
                      cfg.cold_start.learning_rate);
  const PolicyParams reference = policy;

  std::vector<MetricsRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.iterations));
  const double inv_groups = 1.0 / static_cast<double>(cfg.groups_per_iteration);
  std::vector<double> step(policy.size());

  for (int it = 0; it < cfg.iterations; ++it) {
    const PolicyParams old_policy = policy;
    IterationTrace trace;
    trace.iteration = it;
    trace.old_checksum_at_snapshot = old_policy.checksum();
    trace.ref_checksum = reference.checksum();

    // Groups are reduced in index order so the update is reproducible bit for bit.
    std::fill(step.begin(), step.end(), 0.0);
    MetricsRow row;
    row.iteration = it;
    int responses = 0;
    for (int g = 0; g < cfg.groups_per_iteration; ++g) {
      std::mt19937_64 rng = group_stream(cfg.seed, it, g);
      try {
        const RolloutGroup group = build_group(old_policy, reference, env, cfg, rng);
        const GroupEvaluation eval = grpo_gradient(group, policy, cfg.objective);
        for (std::size_t k = 0; k < step.size(); ++k) step[k] += inv_groups * eval.grad[k];
        row.objective_value += inv_groups * eval.objective;
        for (const RewardBreakdown& s : group.scores) {
          row.mean_think_len += s.think_len;
          row.mean_accuracy_reward += s.accuracy_reward;
          row.mean_format_reward += s.format_reward;
          row.frac_formatted += s.format_ok ? 1.0 : 0.0;
          row.frac_correct += s.correct ? 1.0 : 0.0;
          ++responses;
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("train: iteration " + std::to_string(it) + ", group " +
                                 std::to_string(g) + ": " + e.what());
      }
    }
    const double inv_n = 1.0 / static_cast<double>(responses);
    row.mean_think_len *= inv_n;
    row.mean_accuracy_reward *= inv_n;
    row.mean_format_reward *= inv_n;
    row.frac_formatted *= inv_n;
    row.frac_correct *= inv_n;
    rows.push_back(row);

    trace.old_checksum_at_update = old_policy.checksum();
    if (trace.old_checksum_at_update != trace.old_checksum_at_snapshot) {
      throw std::logic_error("train: old-policy snapshot changed within an iteration");
    }
    auto theta = policy.values();
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += cfg.learning_rate * step[k];
    if (hooks.on_iteration) hooks.on_iteration(trace);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Metrics CSV

std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", r.iteration,
                  r.mean_think_len, r.mean_accuracy_reward, r.mean_format_reward, r.frac_formatted,
                  r.frac_correct, r.objective_value);
    out += buf;
  }
  return out;
}

void emit_metrics(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw InvalidArgument("emit_metrics: no rows to write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("emit_metrics: cannot open " + path.string() + " for writing");
  out << format_metrics_csv(rows);
  if (!out.flush()) throw IoError("emit_metrics: write to " + path.string() + " failed");
}

}  // namespace grpo
