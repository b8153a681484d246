#include <fstream>
#include <set>
#include <sstream>

#include "grpo/errors.hpp"
#include "grpo/harness.hpp"
#include "json.hpp"

namespace grpo {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> known) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown config key '" + (where.empty() ? "" : where + ".") + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& field, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    field = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + (where.empty() ? "" : where + ".") + key +
                      "' has the wrong type");
  }
}

}  // namespace

TrainConfig parse_train_config(std::string_view json_text, std::optional<Preset> preset_override) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"G", "iterations", "groups_per_iteration", "learning_rate", "seed", "preset",
                  "reward", "advantage", "objective", "env", "cold_start"});

  TrainConfig cfg;
  read(root, "G", cfg.G, "");
  read(root, "iterations", cfg.iterations, "");
  read(root, "groups_per_iteration", cfg.groups_per_iteration, "");
  read(root, "learning_rate", cfg.learning_rate, "");
  read(root, "seed", cfg.seed, "");
  std::string preset = std::string(preset_name(cfg.preset));
  read(root, "preset", preset, "");
  cfg.preset = parse_preset(preset);

  if (root.contains("reward")) {
    const json& r = root["reward"];
    reject_unknown(r, "reward", {"r0", "r1", "r2", "ML", "option_set", "incorrect_penalty"});
    read(r, "r0", cfg.reward.r0, "reward");
    read(r, "r1", cfg.reward.r1, "reward");
    read(r, "r2", cfg.reward.r2, "reward");
    read(r, "ML", cfg.reward.max_length, "reward");
    read(r, "option_set", cfg.reward.option_set, "reward");
    read(r, "incorrect_penalty", cfg.reward.incorrect_penalty, "reward");
  }
  if (root.contains("advantage")) {
    const json& a = root["advantage"];
    reject_unknown(a, "advantage", {"noise_std", "noise_enabled", "std_normalize", "std_floor"});
    read(a, "noise_std", cfg.advantage.noise_std, "advantage");
    read(a, "noise_enabled", cfg.advantage.noise_enabled, "advantage");
    read(a, "std_normalize", cfg.advantage.std_normalize, "advantage");
    read(a, "std_floor", cfg.advantage.std_floor, "advantage");
  }
  if (root.contains("objective")) {
    const json& o = root["objective"];
    reject_unknown(o, "objective", {"epsilon", "beta", "length_normalize"});
    read(o, "epsilon", cfg.objective.epsilon, "objective");
    read(o, "beta", cfg.objective.beta, "objective");
    read(o, "length_normalize", cfg.objective.length_normalize, "objective");
  }
  if (root.contains("env")) {
    const json& e = root["env"];
    reject_unknown(e, "env", {"num_questions", "num_fillers", "tmax", "cmax"});
    read(e, "num_questions", cfg.env.num_questions, "env");
    read(e, "num_fillers", cfg.env.num_fillers, "env");
    read(e, "tmax", cfg.env.tmax, "env");
    read(e, "cmax", cfg.env.cmax, "env");
  }
  if (root.contains("cold_start")) {
    const json& c = root["cold_start"];
    reject_unknown(c, "cold_start", {"steps", "learning_rate", "num_demos"});
    read(c, "steps", cfg.cold_start.steps, "cold_start");
    read(c, "learning_rate", cfg.cold_start.learning_rate, "cold_start");
    read(c, "num_demos", cfg.cold_start.num_demos, "cold_start");
  }

  cfg = apply_preset(cfg, preset_override.value_or(cfg.preset));
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path,
                              std::optional<Preset> preset_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_train_config(text.str(), preset_override);
}

}  // namespace grpo
