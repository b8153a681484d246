#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace grpo {

enum class Tag { kThinkOpen = 0, kThinkClose = 1, kAnswerOpen = 2, kAnswerClose = 3 };

inline constexpr std::array<std::string_view, 4> kTagText{"<think>", "</think>", "<answer>",
                                                          "</answer>"};

inline constexpr std::string_view kDefaultOptions = "ABCD";

/// Instruction appended to every question.
inline constexpr std::string_view kFormatInstruction =
    "Output the thinking process in <think> </think> and final answer (option) in <answer> "
    "</answer> tags.";

/// Result of checking a response against the tag grammar.
///
/// `think_text` and `answer_text` are only filled when the response is well-formed,
/// i.e. each tag occurs exactly once and in the order think-open, think-close,
/// answer-open, answer-close. Text before, between and after the two blocks is allowed.
struct ParseResult {
  bool format_ok = false;
  std::array<int, 4> tag_counts{};
  std::optional<std::string> think_text;
  std::optional<std::string> answer_text;
  int think_len = 0;
};

/// Appends the format instruction to `question`. Throws InvalidArgument on empty input.
std::string build_prompt(std::string_view question);

ParseResult parse_response(std::string_view text);

/// Number of whitespace-delimited words in the think span, 0 when absent.
int think_length(const ParseResult& parsed);

/// Uppercased option letter taken from the first alphanumeric character of the
/// trimmed answer span, or nullopt if that character is not in `option_set`.
std::optional<char> extract_answer(const ParseResult& parsed,
                                   std::string_view option_set = kDefaultOptions);

int count_words(std::string_view text);

}  // namespace grpo
