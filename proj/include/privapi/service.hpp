#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "privapi/apiretriever.hpp"
#include "privapi/evalharness.hpp"

namespace httplib {
class Server;
}

namespace privapi::service {

struct ServiceConfig {
  std::string selections_path;      // append-only JSONL
  std::size_t candidates_k = 5;
  std::size_t max_generate_n = 20;
  std::size_t default_generate_n = 4;
  double default_temperature = 0.2;
  std::size_t prompt_budget_chars = prompt::kDefaultBudgetChars;
  std::uint64_t seed = 0;
  eval::RunOptions run_options;
};

// problem_id -> user_id -> selected ids; later lines replace earlier ones.
using SelectionTable = std::map<std::string, std::map<std::string, std::set<std::string>>>;
SelectionTable load_selections(const std::string& path);

// Majority vote over one problem's selections.
std::set<std::string> vote_for(const SelectionTable& table, const std::string& problem_id);

struct Response {
  int status = 200;
  std::string body;  // JSON
};

/// Human-in-the-loop endpoints. Handlers are transport independent so they
/// can be exercised without a socket; mount() binds them to an httplib server.
///
///   GET  /problems
///   GET  /problems/{id}/candidates?k=5
///   POST /problems/{id}/selections   {"user_id", "api_ids"}
///   GET  /problems/{id}/vote
///   POST /problems/{id}/generate     {"n", "temperature"}
class Service {
 public:
  Service(const docstore::DocStore& store, const retriever::ApiIndex& index, const retriever::Embedder& embedder,
          std::vector<eval::Problem> problems, gen::CompletionBackend& backend, eval::SandboxRunner& runner,
          ServiceConfig config);

  Response list_problems() const;
  Response candidates(const std::string& problem_id, const std::string& k_param) const;
  Response post_selection(const std::string& problem_id, const std::string& body);
  Response vote(const std::string& problem_id) const;
  Response generate(const std::string& problem_id, const std::string& body);

  void mount(httplib::Server& server);

  // user_id -> selected ids, last write wins
  std::map<std::string, std::set<std::string>> selections(const std::string& problem_id) const;

 private:
  const eval::Problem* lookup(const std::string& problem_id) const;
  std::vector<std::string> top_candidates(const eval::Problem& p, std::size_t k) const;
  std::vector<std::string> voted_ids(const eval::Problem& p) const;  // ordered by candidate rank

  const docstore::DocStore& store_;
  const retriever::ApiIndex& index_;
  const retriever::Embedder& embedder_;
  std::vector<eval::Problem> problems_;
  gen::CompletionBackend& backend_;
  eval::SandboxRunner& runner_;
  ServiceConfig config_;

  mutable std::mutex selections_mutex_;
  SelectionTable selections_;
  std::mutex generate_mutex_;
};

/// Binds host:port and blocks until server.stop(). on_ready receives the
/// bound port (useful with port 0).
void serve(Service& service, const std::string& host, int port, const std::function<void(httplib::Server&, int)>& on_ready = {});

}  // namespace privapi::service
