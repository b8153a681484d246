#include "grpo/policy_env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "grpo/errors.hpp"

namespace grpo {
namespace {

// None of these start with a letter that could be read as an option.
constexpr std::array<std::string_view, 12> kFillerWords{
    "see", "look", "hmm", "so", "then", "wait", "now", "next", "right", "well", "hence", "thus"};

double log_sum_exp(std::span<const double> row) {
  const double hi = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - hi);
  return hi + std::log(s);
}

}  // namespace

void EnvConfig::validate() const {
  if (num_questions < 1) throw InvalidArgument("env.num_questions must be >= 1");
  if (num_fillers < 1) throw ConfigError("env.num_fillers must be >= 1");
  if (tmax < 1) throw ConfigError("env.tmax must be >= 1");
  if (cmax < 0) throw ConfigError("env.cmax must be >= 0");
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab(int num_fillers, std::string_view option_set)
    : num_fillers_(num_fillers), options_(option_set) {
  if (num_fillers < 1) throw InvalidArgument("Vocab: need at least one filler token");
  if (option_set.empty()) throw InvalidArgument("Vocab: empty option set");
  for (auto tag : kTagText) tokens_.emplace_back(tag);
  for (int k = 0; k < num_fillers; ++k) {
    tokens_.push_back(k < static_cast<int>(kFillerWords.size())
                          ? std::string(kFillerWords[static_cast<std::size_t>(k)])
                          : "x" + std::to_string(k));
  }
  for (char c : option_set) tokens_.emplace_back(1, c);
  tokens_.emplace_back("<eos>");
}

Vocab::Kind Vocab::kind(int id) const {
  if (id < 0 || id >= size()) throw InvalidArgument("Vocab: token id out of range");
  if (id < 4) return Kind::kTag;
  if (id < 4 + num_fillers_) return Kind::kFiller;
  if (id < eos()) return Kind::kOption;
  return Kind::kEos;
}

int Vocab::option_for(char letter) const {
  const auto pos = options_.find(letter);
  if (pos == std::string::npos) throw InvalidArgument("Vocab: unknown option letter");
  return option(static_cast<int>(pos));
}

std::string Vocab::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (kind(id) == Kind::kEos) continue;
    if (!out.empty()) out += ' ';
    out += text(id);
  }
  return out;
}

Phase phase_transition(Phase phase, int token, const Vocab& vocab) {
  const Vocab::Kind kind = vocab.kind(token);
  if (kind == Vocab::Kind::kEos) return Phase::kEnd;
  if (kind != Vocab::Kind::kTag) return phase;
  switch (static_cast<Tag>(token)) {
    case Tag::kThinkOpen:
      return phase == Phase::kStart ? Phase::kThink : phase;
    case Tag::kThinkClose:
      return phase == Phase::kThink ? Phase::kAfterThink : phase;
    case Tag::kAnswerOpen:
      return phase == Phase::kAfterThink ? Phase::kAnswer : phase;
    case Tag::kAnswerClose:
      return phase == Phase::kAnswer ? Phase::kAfterOpt : phase;
  }
  return phase;
}

// ---------------------------------------------------------------------------
// PolicyParams

PolicyParams::PolicyParams(int num_states, int vocab_size)
    : num_states_(num_states),
      vocab_size_(vocab_size),
      theta_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(vocab_size), 0.0) {
  if (num_states < 1 || vocab_size < 1) throw InvalidArgument("PolicyParams: empty table");
}

void PolicyParams::check(int state, int token) const {
  if (state < 0 || state >= num_states_) throw InvalidArgument("policy: state out of range");
  if (token < 0 || token >= vocab_size_) throw InvalidArgument("policy: token out of range");
}

std::span<double> PolicyParams::row(int state) {
  check(state, 0);
  return std::span<double>(theta_).subspan(static_cast<std::size_t>(state) * vocab_size_,
                                           static_cast<std::size_t>(vocab_size_));
}

std::span<const double> PolicyParams::row(int state) const {
  check(state, 0);
  return std::span<const double>(theta_).subspan(static_cast<std::size_t>(state) * vocab_size_,
                                                 static_cast<std::size_t>(vocab_size_));
}

double PolicyParams::log_prob(int state, int token) const {
  check(state, token);
  const auto r = row(state);
  return r[static_cast<std::size_t>(token)] - log_sum_exp(r);
}

std::vector<double> PolicyParams::probs(int state) const {
  const auto r = row(state);
  const double lse = log_sum_exp(r);
  std::vector<double> p(r.size());
  for (std::size_t a = 0; a < r.size(); ++a) p[a] = std::exp(r[a] - lse);
  return p;
}

std::size_t PolicyParams::checksum() const {
  const std::string_view bytes(reinterpret_cast<const char*>(theta_.data()),
                               theta_.size() * sizeof(double));
  return std::hash<std::string_view>{}(bytes);
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(const EnvConfig& cfg, const RewardConfig& reward, std::uint64_t key_seed)
    : cfg_(cfg), max_length_(reward.max_length), vocab_(cfg.num_fillers, reward.option_set) {
  cfg_.validate();
  if (max_length_ <= 0) throw ConfigError("Environment: reward.ML must be > 0");
  std::mt19937_64 rng(key_seed);
  std::uniform_int_distribution<std::size_t> pick(0, reward.option_set.size() - 1);
  answer_key_.resize(static_cast<std::size_t>(cfg_.num_questions));
  for (char& c : answer_key_) c = reward.option_set[pick(rng)];
}

char Environment::answer_for(int q_id) const {
  if (q_id < 0 || q_id >= cfg_.num_questions) throw InvalidArgument("answer_for: bad q_id");
  return answer_key_[static_cast<std::size_t>(q_id)];
}

int Environment::bucket_for(int think_count) const {
  const long scaled = static_cast<long>(think_count) * cfg_.cmax / max_length_;
  return static_cast<int>(std::min<long>(cfg_.cmax, scaled));
}

int Environment::state_id(int q_id, Phase phase, int bucket) const {
  if (q_id < 0 || q_id >= cfg_.num_questions) throw InvalidArgument("state_id: bad q_id");
  if (bucket < 0 || bucket > cfg_.cmax) throw InvalidArgument("state_id: bad bucket");
  return (q_id * kPhaseCount + static_cast<int>(phase)) * (cfg_.cmax + 1) + bucket;
}

int Environment::BlockCounter::state(int q_id) const {
  int bucket = 0;
  if (phase_ == Phase::kThink) bucket = env_->bucket_for(count_);
  if (phase_ == Phase::kAnswer) bucket = std::min(count_, env_->config().cmax);
  return env_->state_id(q_id, phase_, bucket);
}

void Environment::BlockCounter::advance(int token) {
  const Phase next = phase_transition(phase_, token, env_->vocab());
  count_ = next == phase_ ? count_ + 1 : 0;
  phase_ = next;
}

std::vector<int> Environment::walk(int q_id, std::span<const int> tokens) const {
  std::vector<int> states;
  states.reserve(tokens.size());
  BlockCounter counter(*this);
  for (int tok : tokens) {
    states.push_back(counter.state(q_id));
    counter.advance(tok);
  }
  return states;
}

std::vector<int> Environment::canonical_response(std::span<const int> filler_ids,
                                                 char letter) const {
  std::vector<int> out{vocab_.tag(Tag::kThinkOpen)};
  for (int f : filler_ids) out.push_back(vocab_.filler(f));
  out.push_back(vocab_.tag(Tag::kThinkClose));
  out.push_back(vocab_.tag(Tag::kAnswerOpen));
  out.push_back(vocab_.option_for(letter));
  out.push_back(vocab_.tag(Tag::kAnswerClose));
  out.push_back(vocab_.eos());
  return out;
}

// ---------------------------------------------------------------------------
// Sampling and scoring

Task sample_task(const Environment& env, std::mt19937_64& rng) {
  const int q_count = env.config().num_questions;
  if (q_count < 1) throw InvalidArgument("sample_task: need at least one question");
  std::uniform_int_distribution<int> pick(0, q_count - 1);
  Task task;
  task.q_id = pick(rng);
  task.correct_option = env.answer_for(task.q_id);
  task.question_text =
      build_prompt("Question " + std::to_string(task.q_id) + ": choose the correct option.");
  return task;
}

Rollout sample_response(const PolicyParams& policy, const Environment& env, const Task& task,
                        std::mt19937_64& rng, int tmax) {
  if (tmax < 1) throw InvalidArgument("sample_response: Tmax must be >= 1");
  const Vocab& vocab = env.vocab();
  Rollout out;
  Environment::BlockCounter counter(env);
  while (static_cast<int>(out.tokens.size()) < tmax && counter.phase() != Phase::kEnd) {
    const int state = counter.state(task.q_id);
    const std::vector<double> p = policy.probs(state);
    std::discrete_distribution<int> draw(p.begin(), p.end());
    const int tok = draw(rng);
    out.tokens.push_back(tok);
    out.states.push_back(state);
    out.logp_new.push_back(policy.log_prob(state, tok));
    counter.advance(tok);
  }
  out.text = vocab.detokenize(out.tokens);
  return out;
}

std::vector<double> replay_logprob(const PolicyParams& policy, const Rollout& rollout) {
  if (rollout.states.size() != rollout.tokens.size()) {
    throw InvalidArgument("replay_logprob: states and tokens differ in length");
  }
  std::vector<double> out(rollout.tokens.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = policy.log_prob(rollout.states[t], rollout.tokens[t]);
  }
  return out;
}

void accumulate_score(const PolicyParams& policy, int state, int token, double weight,
                      std::span<double> grad) {
  const std::vector<double> p = policy.probs(state);
  const std::size_t base = static_cast<std::size_t>(state) * policy.vocab_size();
  for (std::size_t a = 0; a < p.size(); ++a) grad[base + a] -= weight * p[a];
  grad[base + static_cast<std::size_t>(token)] += weight;
}

std::vector<double> logprob_gradient(const PolicyParams& policy, const Rollout& rollout) {
  if (rollout.states.size() != rollout.tokens.size()) {
    throw InvalidArgument("logprob_gradient: states and tokens differ in length");
  }
  std::vector<double> grad(policy.size(), 0.0);
  for (std::size_t t = 0; t < rollout.tokens.size(); ++t) {
    const int s = rollout.states[t];
    const int a = rollout.tokens[t];
    if (s < 0 || s >= policy.num_states() || a < 0 || a >= policy.vocab_size()) {
      throw InvalidArgument("logprob_gradient: state/token out of range");
    }
    accumulate_score(policy, s, a, 1.0, grad);
  }
  return grad;
}

}  // namespace grpo
