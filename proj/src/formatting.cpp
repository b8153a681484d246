#include "grpo/formatting.hpp"

#include <cctype>
#include <cstddef>
#include <vector>

#include "grpo/errors.hpp"

namespace grpo {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> hits;
  std::size_t pos = text.find(needle);
  while (pos != std::string_view::npos) {
    hits.push_back(pos);
    pos = text.find(needle, pos + needle.size());
  }
  return hits;
}

}  // namespace

std::string build_prompt(std::string_view question) {
  if (question.empty()) throw InvalidArgument("build_prompt: question text is empty");
  std::string prompt(question);
  prompt += ' ';
  prompt += kFormatInstruction;
  return prompt;
}

int count_words(std::string_view text) {
  int words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

ParseResult parse_response(std::string_view text) {
  ParseResult result;
  std::array<std::size_t, 4> position{};
  for (std::size_t t = 0; t < kTagText.size(); ++t) {
    const auto hits = find_all(text, kTagText[t]);
    result.tag_counts[t] = static_cast<int>(hits.size());
    if (!hits.empty()) position[t] = hits.front();
  }

  for (int count : result.tag_counts) {
    if (count != 1) return result;
  }
  // Tags are distinct literals, so strict position order also rules out overlap.
  for (std::size_t t = 1; t < position.size(); ++t) {
    if (position[t] < position[t - 1] + kTagText[t - 1].size()) return result;
  }

  const auto span = [&](Tag open, Tag close) {
    const auto o = static_cast<std::size_t>(open);
    const auto c = static_cast<std::size_t>(close);
    const std::size_t begin = position[o] + kTagText[o].size();
    return std::string(text.substr(begin, position[c] - begin));
  };
  result.format_ok = true;
  result.think_text = span(Tag::kThinkOpen, Tag::kThinkClose);
  result.answer_text = span(Tag::kAnswerOpen, Tag::kAnswerClose);
  result.think_len = count_words(*result.think_text);
  return result;
}

int think_length(const ParseResult& parsed) {
  return parsed.think_text ? count_words(*parsed.think_text) : 0;
}

std::optional<char> extract_answer(const ParseResult& parsed, std::string_view option_set) {
  if (!parsed.format_ok || !parsed.answer_text) return std::nullopt;
  for (char c : *parsed.answer_text) {
    const auto uc = static_cast<unsigned char>(c);
    if (!std::isalnum(uc)) continue;
    const char letter = static_cast<char>(std::toupper(uc));
    if (option_set.find(letter) != std::string_view::npos) return letter;
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace grpo
