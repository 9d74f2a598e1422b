#include "privapi/pipeline.hpp"

#include "privapi/error.hpp"
#include "privapi/util.hpp"

namespace privapi::pipeline {

std::vector<prompt::Prompt> build_prompts(const std::vector<eval::Problem>& problems, const docstore::DocStore& store,
                                          const PromptOptions& options) {
  std::vector<prompt::Prompt> out;
  out.reserve(problems.size());
  for (const auto& p : problems) {
    prompt::PromptSetting setting;
    switch (options.variant) {
      case prompt::Variant::NoApi:
        setting = prompt::PromptSetting::no_api();
        break;
      case prompt::Variant::Perfect:
        setting = prompt::PromptSetting::perfect(p.golden_api_ids);
        break;
      case prompt::Variant::TopN: {
        if (!options.index || !options.embedder) throw Error(Errc::InvalidArgs, "top-n prompting needs an index");
        auto ranked = retriever::query(*options.index, eval::problem_description(p), options.top_n, *options.embedder, p.problem_id);
        setting = prompt::PromptSetting::top(options.top_n, ranked.ids());
        break;
      }
      case prompt::Variant::Human: {
        if (!options.selections) throw Error(Errc::InvalidArgs, "human prompting needs a selections file");
        auto voted = service::vote_for(*options.selections, p.problem_id);
        setting = prompt::PromptSetting::human({voted.begin(), voted.end()});
        break;
      }
    }
    out.push_back(prompt::assemble_prompt(p.context, setting, store, options.budget_chars, p.problem_id));
  }
  return out;
}

std::vector<gen::Candidate> generate_all(const std::vector<prompt::Prompt>& prompts, const gen::GenerationConfig& cfg,
                                         gen::CompletionBackend& backend) {
  std::vector<gen::Candidate> out;
  for (const auto& p : prompts) {
    auto cands = gen::generate(p, cfg, backend);
    out.insert(out.end(), std::make_move_iterator(cands.begin()), std::make_move_iterator(cands.end()));
  }
  return out;
}

std::vector<gen::Candidate> load_candidates(const std::string& path) {
  std::vector<gen::Candidate> out;
  for (const auto& raw : split_lines(read_file(path))) {
    auto line = trim(raw);
    if (!line.empty()) out.push_back(gen::candidate_from_json(line));
  }
  return out;
}

std::vector<std::size_t> default_k_list(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t k : {1, 10, 100}) {
    if (k <= n) out.push_back(k);
  }
  return out;
}

}  // namespace privapi::pipeline
