#pragma once

#include <string>
#include <vector>

#include "privapi/apiretriever.hpp"
#include "privapi/evalharness.hpp"
#include "privapi/service.hpp"

namespace privapi::pipeline {

struct PromptOptions {
  prompt::Variant variant = prompt::Variant::NoApi;
  std::size_t top_n = 5;
  std::size_t budget_chars = prompt::kDefaultBudgetChars;
  const retriever::ApiIndex* index = nullptr;          // TopN
  const retriever::Embedder* embedder = nullptr;       // TopN
  const service::SelectionTable* selections = nullptr; // Human
};

// One prompt per problem, in benchmark order. TopN ranks on the problem's
// description; Human uses the majority vote (problems without votes get no APIs).
std::vector<prompt::Prompt> build_prompts(const std::vector<eval::Problem>& problems, const docstore::DocStore& store,
                                          const PromptOptions& options);

std::vector<gen::Candidate> generate_all(const std::vector<prompt::Prompt>& prompts, const gen::GenerationConfig& cfg,
                                         gen::CompletionBackend& backend);

std::vector<gen::Candidate> load_candidates(const std::string& path);

// {1, 10, 100} restricted to k <= n
std::vector<std::size_t> default_k_list(std::size_t n);

}  // namespace privapi::pipeline
