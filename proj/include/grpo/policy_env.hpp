#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grpo/rewards.hpp"

namespace grpo {

// Synthetic multiple-choice environment and tabular softmax token policy.
//
// The vocabulary is laid out as: 4 structural tags, K filler words, one token per
// option letter, then an end-of-sequence marker. A policy state is the triple
// (question, phase, bucket). Inside the think block the bucket is the think word count
// scaled to the length-reward horizon; inside the answer block it is the number of
// tokens already emitted there (so "open answer" and "option given" are different
// states). It is 0 in every other phase.

enum class Phase : int { kStart = 0, kThink, kAfterThink, kAnswer, kAfterOpt, kEnd };
inline constexpr int kPhaseCount = 6;

struct EnvConfig {
  int num_questions = 4;
  int num_fillers = 6;
  int tmax = 48;
  int cmax = 8;  // highest think bucket index

  void validate() const;
};

class Vocab {
 public:
  enum class Kind { kTag, kFiller, kOption, kEos };

  Vocab(int num_fillers, std::string_view option_set);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& text(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  Kind kind(int id) const;

  int tag(Tag t) const { return static_cast<int>(t); }
  int filler(int k) const { return 4 + k; }
  int option(int k) const { return 4 + num_fillers_ + k; }
  int option_for(char letter) const;
  int eos() const { return size() - 1; }
  int num_fillers() const { return num_fillers_; }
  int num_options() const { return static_cast<int>(options_.size()); }

  /// Space-joined token texts; the end-of-sequence marker is not rendered.
  std::string detokenize(std::span<const int> ids) const;

 private:
  int num_fillers_;
  std::string options_;
  std::vector<std::string> tokens_;
};

Phase phase_transition(Phase phase, int token, const Vocab& vocab);

struct Task {
  int q_id = 0;
  char correct_option = 'A';
  std::string question_text;
};

/// Tabular logits indexed by (state, token). Stored row-major.
class PolicyParams {
 public:
  PolicyParams() = default;
  PolicyParams(int num_states, int vocab_size);

  int num_states() const { return num_states_; }
  int vocab_size() const { return vocab_size_; }
  std::size_t size() const { return theta_.size(); }

  std::span<double> row(int state);
  std::span<const double> row(int state) const;
  std::span<double> values() { return theta_; }
  std::span<const double> values() const { return theta_; }

  double log_prob(int state, int token) const;
  std::vector<double> probs(int state) const;

  /// Stable hash of the parameter bytes; used to check that snapshots stay frozen.
  std::size_t checksum() const;

  bool operator==(const PolicyParams&) const = default;

 private:
  void check(int state, int token) const;

  int num_states_ = 0;
  int vocab_size_ = 0;
  std::vector<double> theta_;
};

struct Rollout {
  std::vector<int> tokens;
  std::vector<int> states;
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
  std::string text;

  std::size_t length() const { return tokens.size(); }
};

class Environment {
 public:
  /// `reward` supplies the option letters and the length-reward horizon that the
  /// think buckets are scaled to. `key_seed` fixes the answer key.
  Environment(const EnvConfig& cfg, const RewardConfig& reward, std::uint64_t key_seed);

  const EnvConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  int num_states() const { return cfg_.num_questions * kPhaseCount * (cfg_.cmax + 1); }
  char answer_for(int q_id) const;

  int bucket_for(int think_count) const;

  /// Tracks phase and the per-block token count while a response is emitted.
  class BlockCounter {
   public:
    explicit BlockCounter(const Environment& env) : env_(&env) {}
    Phase phase() const { return phase_; }
    int state(int q_id) const;
    void advance(int token);

   private:
    const Environment* env_;
    Phase phase_ = Phase::kStart;
    int count_ = 0;
  };
  int state_id(int q_id, Phase phase, int bucket) const;

  PolicyParams make_policy() const { return PolicyParams(num_states(), vocab_.size()); }

  /// States visited when emitting `tokens` for question `q_id`, one per token.
  std::vector<int> walk(int q_id, std::span<const int> tokens) const;

  /// `<think> f... </think> <answer> L </answer> <eos>` with the given filler ids.
  std::vector<int> canonical_response(std::span<const int> filler_ids, char letter) const;

 private:
  EnvConfig cfg_;
  int max_length_;
  Vocab vocab_;
  std::string answer_key_;
};

Task sample_task(const Environment& env, std::mt19937_64& rng);

Rollout sample_response(const PolicyParams& policy, const Environment& env, const Task& task,
                        std::mt19937_64& rng, int tmax);

/// Per-token log-probabilities of the recorded tokens under `policy`.
std::vector<double> replay_logprob(const PolicyParams& policy, const Rollout& rollout);

/// Gradient of sum_t log pi(a_t | s_t) with respect to every logit.
std::vector<double> logprob_gradient(const PolicyParams& policy, const Rollout& rollout);

/// Adds weight * (onehot(token) - softmax(row(state))) into `grad`.
void accumulate_score(const PolicyParams& policy, int state, int token, double weight,
                      std::span<double> grad);

}  // namespace grpo
