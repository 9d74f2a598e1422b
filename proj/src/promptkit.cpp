#include "privapi/promptkit.hpp"

#include <algorithm>

#include "privapi/error.hpp"

namespace privapi::prompt {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::NoApi: return "noapi";
    case Variant::Perfect: return "perfect";
    case Variant::TopN: return "topn";
    case Variant::Human: return "human";
  }
  return "noapi";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::NoApi, Variant::Perfect, Variant::TopN, Variant::Human}) {
    if (variant_name(v) == name) return v;
  }
  throw Error(Errc::InvalidArgs, "unknown prompt setting \"" + std::string(name) + "\" (noapi|perfect|topn|human)");
}

PromptSetting PromptSetting::perfect(std::vector<std::string> golden) {
  return {Variant::Perfect, 0, std::move(golden)};
}

PromptSetting PromptSetting::top(std::size_t n, const std::vector<std::string>& ranked) {
  PromptSetting s{Variant::TopN, n, {}};
  s.api_ids.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(n, ranked.size())));
  return s;
}

PromptSetting PromptSetting::human(std::vector<std::string> voted) {
  return {Variant::Human, 0, std::move(voted)};
}

std::string PromptSetting::label() const {
  switch (variant) {
    case Variant::NoApi: return "NoApi";
    case Variant::Perfect: return "Perfect";
    case Variant::TopN: return "Top-" + std::to_string(top_n);
    case Variant::Human: return "Human";
  }
  return "NoApi";
}

std::string render_api_block(const std::vector<std::string>& info_lines) {
  if (info_lines.empty()) return {};
  std::string out(kApiHeader);
  out += '\n';
  for (const auto& line : info_lines) {
    out += "# ";
    out += line;
    out += '\n';
  }
  return out;
}

Prompt assemble_prompt(std::string_view context, const PromptSetting& setting, const docstore::DocStore& store,
                       std::size_t budget_chars, std::string problem_id) {
  if (context.empty()) throw Error(Errc::InvalidArgs, "prompt context must be non-empty");
  if (setting.variant == Variant::NoApi && !setting.api_ids.empty()) {
    throw Error(Errc::InvalidArgs, "the NoApi setting carries no APIs");
  }
  if (setting.variant == Variant::TopN && setting.api_ids.size() > setting.top_n) {
    throw Error(Errc::InvalidArgs, "Top-" + std::to_string(setting.top_n) + " setting lists " + std::to_string(setting.api_ids.size()) + " APIs");
  }
  if (context.size() > budget_chars) {
    throw Error(Errc::BudgetTooSmall, "context alone is " + std::to_string(context.size()) + " chars, budget " + std::to_string(budget_chars));
  }

  std::vector<std::string> lines;
  lines.reserve(setting.api_ids.size());
  for (const auto& id : setting.api_ids) lines.push_back(docstore::api_info_line(store.at(id)));

  // header + "\n", one "# " + line + "\n" per API, blank separator line
  auto total_with = [&](std::size_t count) {
    if (count == 0) return context.size();
    std::size_t n = kApiHeader.size() + 1 + 1 + context.size();
    for (std::size_t i = 0; i < count; ++i) n += 2 + lines[i].size() + 1;
    return n;
  };
  std::size_t keep = lines.size();
  while (keep > 0 && total_with(keep) > budget_chars) --keep;

  Prompt p;
  p.problem_id = std::move(problem_id);
  p.setting = setting;
  p.setting.api_ids.resize(keep);
  p.dropped_apis = lines.size() - keep;
  lines.resize(keep);
  if (keep > 0) {
    p.text = render_api_block(lines);
    p.text += '\n';
  }
  p.text += context;
  return p;
}

}  // namespace privapi::prompt
