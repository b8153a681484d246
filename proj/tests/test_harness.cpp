#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "grpo/errors.hpp"
#include "grpo/harness.hpp"
#include "json.hpp"

using namespace grpo;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("grpo_test_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TrainConfig quick_config(int iterations) {
  TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.groups_per_iteration = 4;
  return cfg;
}

}  // namespace

TEST_CASE("presets map to exact flag sets") {
  const TrainConfig base;
  struct Row {
    Preset preset;
    double beta;
    bool length_normalize;
    bool std_normalize;
    double r1;
    bool penalty;
  };
  const std::vector<Row> table = {
      {Preset::kBaseline, base.objective.beta, true, true, base.reward.r1, true},
      {Preset::kNoKl, 0.0, true, true, base.reward.r1, true},
      {Preset::kDrGrpo, 0.0, false, false, base.reward.r1, true},
      {Preset::kNoLengthReward, base.objective.beta, true, true, 0.0, true},
      {Preset::kNoPenalty, base.objective.beta, true, true, base.reward.r1, false},
  };
  for (const Row& row : table) {
    CAPTURE(preset_name(row.preset));
    const TrainConfig cfg = apply_preset(base, row.preset);
    CHECK(cfg.preset == row.preset);
    CHECK(cfg.objective.beta == row.beta);
    CHECK(cfg.objective.length_normalize == row.length_normalize);
    CHECK(cfg.advantage.std_normalize == row.std_normalize);
    CHECK(cfg.reward.r1 == row.r1);
    CHECK(cfg.reward.incorrect_penalty == row.penalty);
    CHECK(cfg.objective.epsilon == base.objective.epsilon);
    CHECK(cfg.advantage.noise_enabled == base.advantage.noise_enabled);
    CHECK(parse_preset(preset_name(row.preset)) == row.preset);
  }
  CHECK_THROWS_AS(parse_preset("fancy"), ConfigError);
}

TEST_CASE("config parsing") {
  const TrainConfig cfg = parse_train_config(R"({
    "G": 6, "iterations": 12, "seed": 99, "preset": "no_kl",
    "reward": {"ML": 10, "r1": 0.25},
    "objective": {"epsilon": 0.1},
    "env": {"num_questions": 3},
    "cold_start": {"steps": 5}
  })");
  CHECK(cfg.G == 6);
  CHECK(cfg.iterations == 12);
  CHECK(cfg.seed == 99u);
  CHECK(cfg.preset == Preset::kNoKl);
  CHECK(cfg.objective.beta == 0.0);
  CHECK(cfg.objective.epsilon == 0.1);
  CHECK(cfg.reward.max_length == 10);
  CHECK(cfg.reward.r1 == 0.25);
  CHECK(cfg.env.num_questions == 3);
  CHECK(cfg.cold_start.steps == 5);
  CHECK(cfg.learning_rate == TrainConfig{}.learning_rate);

  CHECK(parse_train_config(R"({"preset": "no_kl"})", Preset::kDrGrpo).objective.length_normalize ==
        false);

  CHECK_THROWS_AS(parse_train_config(R"({"Gee": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_train_config(R"({"reward": {"r3": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_train_config(R"({"G": "eight"})"), ConfigError);
  CHECK_THROWS_AS(parse_train_config(R"({"G": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_train_config(R"({"preset": "x"})"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("{"), ConfigError);
  CHECK_THROWS_AS(load_train_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("cold start") {
  const TrainConfig cfg;
  const Environment env(cfg.env, cfg.reward, cfg.seed);
  const auto demos = make_cold_start_demos(env, 16);
  REQUIRE(demos.size() == 16);
  for (const Demo& d : demos) CHECK(parse_response(env.vocab().detokenize(d.tokens)).format_ok);

  SUBCASE("zero steps is the identity") {
    const PolicyParams p = env.make_policy();
    CHECK(cold_start(p, env, demos, 0, 0.5) == p);
  }

  SUBCASE("single-demo likelihood never decreases for a small step") {
    const std::vector<Demo> one{demos[5]};
    PolicyParams p = env.make_policy();
    double previous = demo_log_likelihood(p, env, one);
    for (int k = 0; k < 50; ++k) {
      p = cold_start(p, env, one, 1, 0.05);
      const double now = demo_log_likelihood(p, env, one);
      CHECK(now >= previous);
      previous = now;
    }
  }

  SUBCASE("sampled format rate increases") {
    const PolicyParams untrained = env.make_policy();
    const PolicyParams warm = cold_start(untrained, env, demos, 200, cfg.cold_start.learning_rate);
    CHECK(demo_log_likelihood(warm, env, demos) > demo_log_likelihood(untrained, env, demos));
    std::mt19937_64 a(1);
    std::mt19937_64 b(1);
    CHECK(sampled_format_rate(warm, env, 400, a) > sampled_format_rate(untrained, env, 400, b));
  }

  SUBCASE("malformed demos are rejected") {
    std::vector<Demo> bad{demos[0]};
    bad[0].tokens.erase(bad[0].tokens.begin());  // drop <think>
    CHECK_THROWS_AS(cold_start(env.make_policy(), env, bad, 10, 0.5), InvalidArgument);
  }
}

TEST_CASE("train produces one well-formed row per iteration") {
  TrainConfig cfg;
  cfg.iterations = 300;
  const auto rows = train(cfg);
  REQUIRE(rows.size() == 300);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricsRow& r = rows[i];
    CHECK(r.iteration == static_cast<int>(i));
    CHECK(r.mean_think_len >= 0.0);
    CHECK(r.frac_formatted >= 0.0);
    CHECK(r.frac_formatted <= 1.0);
    CHECK(r.frac_correct >= 0.0);
    CHECK(r.frac_correct <= 1.0);
    CHECK(r.frac_correct <= r.frac_formatted);
    CHECK(std::isfinite(r.objective_value));
  }

  const fs::path out = temp_path("metrics_300.csv");
  emit_metrics(rows, out);
  const auto lines = lines_of(slurp(out));
  CHECK(lines.size() == 301);
  for (const std::string& line : lines) {
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  fs::remove(out);
}

TEST_CASE("training is deterministic and snapshots stay frozen") {
  const TrainConfig cfg = quick_config(25);
  std::vector<IterationTrace> traces;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationTrace& t) { traces.push_back(t); };
  const auto a = train(cfg, hooks);
  const auto b = train(cfg);
  CHECK(format_metrics_csv(a) == format_metrics_csv(b));

  REQUIRE(traces.size() == 25);
  for (const auto& t : traces) {
    CHECK(t.old_checksum_at_snapshot == t.old_checksum_at_update);
    CHECK(t.ref_checksum == traces.front().ref_checksum);
  }
  // The policy moves between iterations, so consecutive snapshots differ.
  CHECK(traces[0].old_checksum_at_snapshot != traces[1].old_checksum_at_snapshot);

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(format_metrics_csv(train(other)) != format_metrics_csv(a));
}

TEST_CASE("group streams are independent of evaluation order") {
  auto a = group_stream(7, 3, 2);
  auto b = group_stream(7, 3, 2);
  auto c = group_stream(7, 3, 1);
  CHECK(a() == b());
  CHECK(a() != c());
}

TEST_CASE("metrics CSV") {
  MetricsRow row{0, 3.25, 0.5, 0.812345678, 0.75, 0.5, -0.000123456789};
  const fs::path out = temp_path("metrics_one.csv");
  emit_metrics({row}, out);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kMetricsHeader);
  CHECK(lines[1] == "0,3.25,0.5,0.812346,0.75,0.5,-0.000123457");

  // Round trip to 6 significant digits.
  std::vector<double> parsed;
  std::stringstream fields(lines[1]);
  for (std::string f; std::getline(fields, f, ',');) parsed.push_back(std::stod(f));
  const std::vector<double> original{0, 3.25, 0.5, 0.812345678, 0.75, 0.5, -0.000123456789};
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(std::abs(parsed[i] - original[i]) <= 5e-6 * std::abs(original[i]) + 1e-300);
  }

  CHECK_THROWS_AS(emit_metrics({}, out), InvalidArgument);
  CHECK_THROWS_AS(emit_metrics({row}, "/nonexistent-dir/m.csv"), IoError);
  fs::remove(out);
}

TEST_CASE("score_transcripts") {
  const RewardConfig cfg;
  const fs::path out = temp_path("scored.jsonl");

  SUBCASE("three reward branches") {
    const auto summary = score_transcripts(fs::path(GRPO_TEST_DATA_DIR) / "branches.jsonl", out, cfg);
    CHECK(summary.scored == 3);
    CHECK(summary.formatted == 2);
    CHECK(summary.correct == 1);
    CHECK(summary.skipped == 0);
    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 3);
    const std::vector<double> expected{2.0, -0.75, -2.0};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto rec = nlohmann::json::parse(lines[i]);
      CHECK(std::abs(rec["R"].get<double>() - expected[i]) < 1e-12);
      for (const char* key : {"id", "format_ok", "think_len", "FR", "LR", "AR", "R"}) {
        CHECK(rec.contains(key));
      }
    }
    CHECK(nlohmann::json::parse(lines[0])["id"] == "correct-long");
    CHECK(nlohmann::json::parse(lines[1])["think_len"] == 10);
  }

  SUBCASE("bad lines are skipped with line numbers") {
    const auto summary = score_transcripts(fs::path(GRPO_TEST_DATA_DIR) / "mixed.jsonl", out, cfg);
    CHECK(summary.scored == 2);
    CHECK(summary.skipped == 3);
    REQUIRE(summary.diagnostics.size() == 3);
    CHECK(summary.diagnostics[0].rfind("line 2:", 0) == 0);
    CHECK(summary.diagnostics[0].find("\"Z\"") != std::string::npos);
    CHECK(summary.diagnostics[1].rfind("line 3:", 0) == 0);
    CHECK(summary.diagnostics[2].rfind("line 4:", 0) == 0);
    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 2);
    CHECK(nlohmann::json::parse(lines[1])["id"] == 6);
    CHECK(nlohmann::json::parse(lines[1])["R"] == 1.5);
  }

  SUBCASE("empty input") {
    const fs::path empty = temp_path("empty.jsonl");
    { std::ofstream touch(empty); }
    const auto summary = score_transcripts(empty, out, cfg);
    CHECK(summary.scored == 0);
    CHECK(summary.formatted == 0);
    CHECK(summary.correct == 0);
    CHECK(slurp(out).empty());
    fs::remove(empty);
  }

  CHECK_THROWS_AS(score_transcripts("/nonexistent/in.jsonl", out, cfg), IoError);
  fs::remove(out);
}
