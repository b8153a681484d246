#include <fstream>

#include "grpo/errors.hpp"
#include "grpo/harness.hpp"
#include "json.hpp"

namespace grpo {

TranscriptSummary score_transcripts(const std::filesystem::path& input,
                                    const std::filesystem::path& output, const RewardConfig& cfg) {
  using nlohmann::json;
  cfg.validate();
  std::ifstream in(input, std::ios::binary);
  if (!in) throw IoError("cannot read transcripts " + input.string());
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + output.string());

  TranscriptSummary summary;
  std::string line;
  int line_no = 0;
  const auto skip = [&](const std::string& why) {
    ++summary.skipped;
    summary.diagnostics.push_back("line " + std::to_string(line_no) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error&) {
      skip("not valid JSON");
      continue;
    }
    if (!record.is_object()) {
      skip("record is not a JSON object");
      continue;
    }
    bool complete = true;
    for (const char* key : {"id", "response", "label"}) {
      if (!record.contains(key)) {
        skip(std::string("missing field '") + key + "'");
        complete = false;
        break;
      }
    }
    if (!complete) continue;
    if (!record["response"].is_string() || !record["label"].is_string()) {
      skip("'response' and 'label' must be strings");
      continue;
    }
    const std::string label = record["label"].get<std::string>();
    if (label.size() != 1 || cfg.option_set.find(label[0]) == std::string::npos) {
      skip("invalid label \"" + label + "\"");
      continue;
    }

    const RewardBreakdown b =
        score_response(record["response"].get<std::string>(), label[0], cfg);
    json result = {{"id", record["id"]},         {"format_ok", b.format_ok},
                   {"think_len", b.think_len},   {"FR", b.format_reward},
                   {"LR", b.length_reward},      {"AR", b.accuracy_reward},
                   {"R", b.total}};
    out << result.dump() << '\n';
    ++summary.scored;
    if (b.format_ok) ++summary.formatted;
    if (b.correct) ++summary.correct;
  }
  if (!out.flush()) throw IoError("write to " + output.string() + " failed");
  return summary;
}

}  // namespace grpo
