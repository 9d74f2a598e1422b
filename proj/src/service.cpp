#include "privapi/service.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "httplib.h"
#include "json.hpp"
#include "privapi/error.hpp"
#include "privapi/util.hpp"

namespace privapi::service {

using nlohmann::json;

namespace {

Response json_response(int status, const json& body) { return {status, body.dump()}; }

Response error_response(int status, std::string_view code, const std::string& message) {
  return json_response(status, json{{"error", code}, {"message", message}});
}

int status_for(const Error& e) {
  switch (e.code()) {
    case Errc::UnknownProblem: return 404;
    case Errc::BackendUnavailable:
    case Errc::RunnerUnavailable: return 503;
    case Errc::BackendMalformedResponse: return 502;
    default: return is_validation_error(e.code()) ? 400 : 500;
  }
}

template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(status_for(e), errc_name(e.code()), e.message());
  } catch (const json::exception& e) {
    return error_response(400, "InvalidArgs", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

}  // namespace

SelectionTable load_selections(const std::string& path) {
  SelectionTable table;
  if (!std::filesystem::exists(path)) return table;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(read_file(path))) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      table[j.at("problem_id").get<std::string>()][j.at("user_id").get<std::string>()] = j.at("api_ids").get<std::set<std::string>>();
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedRecord, path + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return table;
}

std::set<std::string> vote_for(const SelectionTable& table, const std::string& problem_id) {
  auto it = table.find(problem_id);
  if (it == table.end() || it->second.empty()) return {};
  std::vector<std::set<std::string>> sets;
  for (const auto& [_, s] : it->second) sets.push_back(s);
  return retriever::aggregate_votes(sets);
}

Service::Service(const docstore::DocStore& store, const retriever::ApiIndex& index, const retriever::Embedder& embedder,
                 std::vector<eval::Problem> problems, gen::CompletionBackend& backend, eval::SandboxRunner& runner,
                 ServiceConfig config)
    : store_(store),
      index_(index),
      embedder_(embedder),
      problems_(std::move(problems)),
      backend_(backend),
      runner_(runner),
      config_(std::move(config)) {
  if (config_.candidates_k == 0) throw Error(Errc::InvalidConfig, "candidates_k must be positive");
  if (config_.max_generate_n == 0) throw Error(Errc::InvalidConfig, "max_generate_n must be positive");
  if (index_.fingerprint() != embedder_.fingerprint()) {
    throw Error(Errc::FingerprintMismatch, "index built with " + index_.fingerprint() + ", embedder is " + embedder_.fingerprint());
  }
  if (!config_.selections_path.empty()) selections_ = load_selections(config_.selections_path);
}

const eval::Problem* Service::lookup(const std::string& problem_id) const {
  for (const auto& p : problems_) {
    if (p.problem_id == problem_id) return &p;
  }
  return nullptr;
}

std::vector<std::string> Service::top_candidates(const eval::Problem& p, std::size_t k) const {
  return retriever::query(index_, eval::problem_description(p), k, embedder_, p.problem_id).ids();
}

Response Service::list_problems() const {
  json out = json::array();
  for (const auto& p : problems_) {
    out.push_back({{"problem_id", p.problem_id},
                   {"benchmark", p.benchmark},
                   {"description", eval::problem_description(p)},
                   {"context", p.context}});
  }
  return json_response(200, json{{"problems", out}});
}

Response Service::candidates(const std::string& problem_id, const std::string& k_param) const {
  return guarded([&]() -> Response {
    const auto* p = lookup(problem_id);
    if (!p) return error_response(404, "UnknownProblem", "unknown problem " + problem_id);
    std::size_t k = config_.candidates_k;
    if (!k_param.empty()) {
      std::size_t used = 0;
      long long parsed = -1;
      try {
        parsed = std::stoll(k_param, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != k_param.size() || parsed < 1 || static_cast<std::size_t>(parsed) > config_.candidates_k) {
        return error_response(400, "InvalidArgs", "k must be between 1 and " + std::to_string(config_.candidates_k));
      }
      k = static_cast<std::size_t>(parsed);
    }
    json cards = json::array();
    for (const auto& id : top_candidates(*p, k)) {
      const auto& rec = store_.at(id);
      cards.push_back({{"api_id", rec.api_id}, {"name", rec.name}, {"description", rec.description_first}});
    }
    return json_response(200, json{{"problem_id", problem_id}, {"description", eval::problem_description(*p)}, {"candidates", cards}});
  });
}

Response Service::post_selection(const std::string& problem_id, const std::string& body) {
  return guarded([&]() -> Response {
    const auto* p = lookup(problem_id);
    if (!p) return error_response(404, "UnknownProblem", "unknown problem " + problem_id);
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      return error_response(400, "InvalidArgs", std::string("body is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("user_id") || !j["user_id"].is_string() || j["user_id"].get<std::string>().empty()) {
      return error_response(422, "InvalidSelection", "user_id must be a non-empty string");
    }
    if (!j.contains("api_ids") || !j["api_ids"].is_array() || j["api_ids"].empty()) {
      return error_response(422, "InvalidSelection", "api_ids must be a non-empty array");
    }
    const auto allowed_list = top_candidates(*p, config_.candidates_k);
    const std::set<std::string> allowed(allowed_list.begin(), allowed_list.end());
    std::set<std::string> chosen;
    for (const auto& v : j["api_ids"]) {
      if (!v.is_string()) return error_response(422, "InvalidSelection", "api_ids must be strings");
      auto id = v.get<std::string>();
      if (!allowed.contains(id)) return error_response(422, "InvalidSelection", id + " is not among the candidates");
      chosen.insert(std::move(id));
    }
    const auto user = j["user_id"].get<std::string>();

    std::lock_guard lock(selections_mutex_);
    if (!config_.selections_path.empty()) {
      std::ofstream out(config_.selections_path, std::ios::app | std::ios::binary);
      if (!out) throw Error(Errc::Io, "cannot append to " + config_.selections_path);
      out << json{{"problem_id", problem_id}, {"user_id", user}, {"api_ids", chosen}}.dump() << '\n';
      out.flush();
      if (!out) throw Error(Errc::Io, "write failed: " + config_.selections_path);
    }
    selections_[problem_id][user] = chosen;
    return json_response(200, json{{"problem_id", problem_id}, {"user_id", user}, {"api_ids", chosen}});
  });
}

std::map<std::string, std::set<std::string>> Service::selections(const std::string& problem_id) const {
  std::lock_guard lock(selections_mutex_);
  auto it = selections_.find(problem_id);
  return it == selections_.end() ? std::map<std::string, std::set<std::string>>{} : it->second;
}

std::vector<std::string> Service::voted_ids(const eval::Problem& p) const {
  std::set<std::string> winners;
  {
    std::lock_guard lock(selections_mutex_);
    winners = vote_for(selections_, p.problem_id);
  }
  std::vector<std::string> ordered;
  for (const auto& id : top_candidates(p, config_.candidates_k)) {
    if (winners.contains(id)) ordered.push_back(id);
  }
  for (const auto& id : winners) {
    if (std::find(ordered.begin(), ordered.end(), id) == ordered.end()) ordered.push_back(id);
  }
  return ordered;
}

Response Service::vote(const std::string& problem_id) const {
  return guarded([&]() -> Response {
    const auto* p = lookup(problem_id);
    if (!p) return error_response(404, "UnknownProblem", "unknown problem " + problem_id);
    const auto voters = selections(problem_id).size();
    if (voters == 0) return error_response(409, "NoSelections", "no selections yet for " + problem_id);
    return json_response(200, json{{"problem_id", problem_id},
                                   {"voters", voters},
                                   {"threshold", retriever::majority_threshold(voters)},
                                   {"api_ids", voted_ids(*p)}});
  });
}

Response Service::generate(const std::string& problem_id, const std::string& body) {
  return guarded([&]() -> Response {
    const auto* p = lookup(problem_id);
    if (!p) return error_response(404, "UnknownProblem", "unknown problem " + problem_id);
    json j = body.empty() ? json::object() : json::parse(body);
    if (!j.is_object()) return error_response(400, "InvalidArgs", "body must be a JSON object");
    std::size_t n = j.value("n", config_.default_generate_n);
    if (n == 0) return error_response(400, "InvalidArgs", "n must be positive");
    n = std::min(n, config_.max_generate_n);
    const double temperature = j.value("temperature", config_.default_temperature);

    if (selections(problem_id).empty()) return error_response(409, "NoSelections", "no selections yet for " + problem_id);
    const auto ids = voted_ids(*p);

    gen::GenerationConfig cfg;
    cfg.n_samples = n;
    cfg.temperatures = {temperature};
    cfg.seed = config_.seed;
    cfg.validate();
    const auto prompt = prompt::assemble_prompt(p->context, prompt::PromptSetting::human(ids), store_,
                                                config_.prompt_budget_chars, p->problem_id);

    std::lock_guard lock(generate_mutex_);
    const auto candidates = gen::generate(prompt, cfg, backend_);
    const auto results = eval::run_problem(*p, candidates, runner_, config_.run_options);
    const auto& r = results.front();
    json verdicts = json::object();
    for (auto v : {eval::Verdict::Pass, eval::Verdict::Fail, eval::Verdict::Timeout, eval::Verdict::Crash}) {
      verdicts[std::string(eval::verdict_name(v))] = r.count(v);
    }
    return json_response(200, json{{"problem_id", problem_id},
                                   {"setting", prompt.setting.label()},
                                   {"api_ids", prompt.setting.api_ids},
                                   {"n", n},
                                   {"temperature", temperature},
                                   {"verdicts", verdicts},
                                   {"pass_at_1", eval::pass_at_k(r.n, r.c, 1)}});
  });
}

void Service::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/problems", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, list_problems()); });
  server.Get(R"(/problems/(.+)/candidates)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, candidates(req.matches[1], req.has_param("k") ? req.get_param_value("k") : std::string{}));
  });
  server.Post(R"(/problems/(.+)/selections)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, post_selection(req.matches[1], req.body));
  });
  server.Get(R"(/problems/(.+)/vote)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, vote(req.matches[1]));
  });
  server.Post(R"(/problems/(.+)/generate)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, generate(req.matches[1], req.body));
  });
}

void serve(Service& service, const std::string& host, int port, const std::function<void(httplib::Server&, int)>& on_ready) {
  httplib::Server server;
  service.mount(server);
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
  if (on_ready) on_ready(server, bound);
  if (!server.listen_after_bind()) throw Error(Errc::Io, "server stopped with an error");
}

}  // namespace privapi::service
