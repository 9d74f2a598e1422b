#include "privapi/genclient.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "privapi/error.hpp"
#include "privapi/http_endpoint.hpp"
#include "privapi/util.hpp"

namespace privapi::gen {

namespace {

using nlohmann::json;

struct Batch {
  std::size_t temperature_index;
  std::size_t first_sample;
  std::size_t count;
};

std::vector<std::string> complete_with_retry(CompletionBackend& backend, const CompletionRequest& req,
                                             std::chrono::milliseconds backoff) {
  for (int attempt = 1;; ++attempt) {
    try {
      auto out = backend.complete(req);
      if (out.size() != req.n) {
        throw Error(Errc::BackendMalformedResponse,
                    "asked for " + std::to_string(req.n) + " completions, got " + std::to_string(out.size()));
      }
      return out;
    } catch (const Error& e) {
      if (e.code() != Errc::BackendUnavailable || attempt >= kMaxAttempts) {
        if (e.code() == Errc::BackendUnavailable) {
          throw Error(Errc::BackendUnavailable, e.message() + " (gave up after " + std::to_string(attempt) + " attempts)");
        }
        throw;
      }
    }
    std::this_thread::sleep_for(backoff * (1LL << (attempt - 1)));
  }
}

}  // namespace

std::vector<double> default_temperatures() {
  std::vector<double> t;
  for (int i = 1; i <= 10; ++i) t.push_back(i / 10.0);
  return t;
}

void GenerationConfig::validate() const {
  if (n_samples == 0) throw Error(Errc::InvalidConfig, "n_samples must be >= 1");
  if (temperatures.empty()) throw Error(Errc::InvalidConfig, "at least one temperature is required");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    const double t = temperatures[i];
    if (!(t > 0.0 && t <= 2.0)) throw Error(Errc::InvalidConfig, "temperature " + std::to_string(t) + " outside (0, 2]");
    if (i > 0 && !(t > temperatures[i - 1])) throw Error(Errc::InvalidConfig, "temperatures must be strictly increasing");
  }
  if (max_in_flight == 0) throw Error(Errc::InvalidConfig, "max_in_flight must be >= 1");
}

MockBackend::MockBackend(std::map<std::string, std::vector<std::string>> script) : script_(std::move(script)) {}

std::vector<std::string> MockBackend::complete(const CompletionRequest& request) {
  auto it = script_.find(request.problem_id);
  if (it == script_.end() || it->second.empty()) {
    throw Error(Errc::UnknownProblem, "no scripted completions for problem \"" + request.problem_id + "\"");
  }
  const auto& lines = it->second;
  std::vector<std::string> out;
  out.reserve(request.n);
  for (std::size_t i = 0; i < request.n; ++i) out.push_back(lines[(request.first_sample + i) % lines.size()]);
  return out;
}

std::unique_ptr<CompletionBackend> mock_backend(std::map<std::string, std::vector<std::string>> script) {
  return std::make_unique<MockBackend>(std::move(script));
}

std::map<std::string, std::vector<std::string>> load_mock_script(const std::string& path) {
  try {
    return json::parse(read_file(path)).get<std::map<std::string, std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, "mock script " + path + ": " + e.what());
  }
}

HttpBackend::HttpBackend(std::string endpoint, std::string api_key, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {
  parse_http_endpoint(endpoint_);
}

std::unique_ptr<HttpBackend> HttpBackend::from_env() {
  const char* endpoint = std::getenv("GEN_ENDPOINT");
  if (!endpoint || !*endpoint) throw Error(Errc::InvalidConfig, "GEN_ENDPOINT is not set");
  const char* key = std::getenv("GEN_API_KEY");
  long timeout = 120;
  if (const char* t = std::getenv("GEN_TIMEOUT_SECS"); t && *t) {
    char* end = nullptr;
    timeout = std::strtol(t, &end, 10);
    if (*end != '\0' || timeout <= 0) throw Error(Errc::InvalidConfig, "GEN_TIMEOUT_SECS must be a positive integer");
  }
  return std::make_unique<HttpBackend>(endpoint, key ? key : "", std::chrono::seconds(timeout));
}

std::vector<std::string> HttpBackend::complete(const CompletionRequest& request) {
  const auto target = parse_http_endpoint(endpoint_);
  httplib::Client client(target.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

  json body;
  body["prompt"] = request.prompt;
  body["n"] = request.n;
  body["temperature"] = request.temperature;
  body["max_new_tokens"] = request.max_new_tokens;
  body["stop"] = request.stop;
  body["seed"] = request.seed;
  auto res = client.Post(target.path_prefix + "/complete", body.dump(), "application/json");
  if (!res) throw Error(Errc::BackendUnavailable, "completion backend unreachable at " + endpoint_);
  if (res->status == 429 || res->status >= 500) {
    throw Error(Errc::BackendUnavailable, "completion backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) throw Error(Errc::BackendMalformedResponse, "completion backend returned HTTP " + std::to_string(res->status));
  try {
    auto reply = json::parse(res->body);
    return reply.at("completions").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::BackendMalformedResponse, std::string("bad completion response: ") + e.what());
  }
}

std::vector<Candidate> generate(const prompt::Prompt& prompt, const GenerationConfig& cfg, CompletionBackend& backend) {
  cfg.validate();
  const std::size_t batch = cfg.batch_size == 0 ? cfg.n_samples : cfg.batch_size;
  std::vector<Batch> batches;
  for (std::size_t t = 0; t < cfg.temperatures.size(); ++t) {
    for (std::size_t first = 0; first < cfg.n_samples; first += batch) {
      batches.push_back({t, first, std::min(batch, cfg.n_samples - first)});
    }
  }

  std::vector<Candidate> out(cfg.temperatures.size() * cfg.n_samples);
  parallel_for(batches.size(), cfg.max_in_flight, [&](std::size_t b) {
    const auto& job = batches[b];
    CompletionRequest req;
    req.problem_id = prompt.problem_id;
    req.prompt = prompt.text;
    req.n = job.count;
    req.temperature = cfg.temperatures[job.temperature_index];
    req.max_new_tokens = cfg.max_new_tokens;
    req.stop = cfg.stop_sequences;
    req.seed = cfg.seed + job.temperature_index * 1000003ULL + job.first_sample;
    req.first_sample = job.first_sample;
    auto codes = complete_with_retry(backend, req, cfg.backoff_base);
    for (std::size_t i = 0; i < job.count; ++i) {
      auto& c = out[job.temperature_index * cfg.n_samples + job.first_sample + i];
      c.problem_id = prompt.problem_id;
      c.temperature = req.temperature;
      c.sample_index = job.first_sample + i;
      c.code = std::move(codes[i]);
    }
  });
  return out;
}

std::string candidate_json(const Candidate& c) {
  nlohmann::ordered_json j;
  j["problem_id"] = c.problem_id;
  j["temperature"] = c.temperature;
  j["sample_index"] = c.sample_index;
  j["code"] = c.code;
  return j.dump();
}

Candidate candidate_from_json(const std::string& line) {
  try {
    auto j = json::parse(line);
    return {j.at("problem_id").get<std::string>(), j.at("temperature").get<double>(),
            j.at("sample_index").get<std::size_t>(), j.at("code").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgs, std::string("bad candidate line: ") + e.what());
  }
}

}  // namespace privapi::gen
