#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "privapi/docstore.hpp"

namespace privapi::prompt {

inline constexpr std::size_t kDefaultBudgetChars = 4000;
inline constexpr std::string_view kApiHeader = "# Useful APIs:";

enum class Variant { NoApi, Perfect, TopN, Human };

std::string_view variant_name(Variant v) noexcept;
Variant parse_variant(std::string_view name);  // throws InvalidArgs

struct PromptSetting {
  Variant variant = Variant::NoApi;
  std::size_t top_n = 0;              // only meaningful for TopN
  std::vector<std::string> api_ids;   // in prompting order

  static PromptSetting no_api() { return {}; }
  static PromptSetting perfect(std::vector<std::string> golden);
  // Keeps at most n ids from the front of the ranked list.
  static PromptSetting top(std::size_t n, const std::vector<std::string>& ranked);
  static PromptSetting human(std::vector<std::string> voted);

  // "NoApi", "Perfect", "Top-5", "Human"
  std::string label() const;
};

struct Prompt {
  std::string text;
  PromptSetting setting;      // api_ids reflect what survived the budget
  std::string problem_id;
  std::size_t dropped_apis = 0;
};

// "# Useful APIs:\n" followed by "# <line>\n" per entry; empty input gives "".
std::string render_api_block(const std::vector<std::string>& info_lines);

/// Concat(A, x): the API block, a blank line, then the context untouched.
///
/// If the prompt would exceed budget_chars, APIs are dropped from the end of
/// the list until it fits. When no API survives the header is omitted too
/// and the prompt is exactly the context.
Prompt assemble_prompt(std::string_view context, const PromptSetting& setting, const docstore::DocStore& store,
                       std::size_t budget_chars = kDefaultBudgetChars, std::string problem_id = {});

}  // namespace privapi::prompt
