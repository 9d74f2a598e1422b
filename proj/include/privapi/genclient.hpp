#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "privapi/promptkit.hpp"

namespace privapi::gen {

inline constexpr std::size_t kDefaultSamples = 200;
inline constexpr std::size_t kDefaultMaxNewTokens = 300;
inline constexpr int kMaxAttempts = 5;

// 0.1, 0.2, ..., 1.0
std::vector<double> default_temperatures();

struct GenerationConfig {
  std::size_t n_samples = kDefaultSamples;
  std::vector<double> temperatures = default_temperatures();
  std::size_t max_new_tokens = kDefaultMaxNewTokens;
  std::vector<std::string> stop_sequences;
  std::uint64_t seed = 0;
  // Largest n per backend request; 0 means one request per temperature.
  std::size_t batch_size = 0;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds backoff_base{500};

  void validate() const;  // throws InvalidConfig
};

struct Candidate {
  std::string problem_id;
  double temperature = 0.0;
  std::size_t sample_index = 0;
  std::string code;

  bool operator==(const Candidate&) const = default;
};

struct CompletionRequest {
  std::string problem_id;
  std::string prompt;
  std::size_t n = 1;
  double temperature = 0.0;
  std::size_t max_new_tokens = kDefaultMaxNewTokens;
  std::vector<std::string> stop;
  std::uint64_t seed = 0;
  std::size_t first_sample = 0;  // offset of this batch within the temperature
};

/// Source of completions. complete() throws BackendUnavailable for transient
/// failures (retried by generate) and BackendMalformedResponse otherwise.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::vector<std::string> complete(const CompletionRequest& request) = 0;
};

/// Scripted backend: sample i of a problem is script[i % script.size()].
class MockBackend final : public CompletionBackend {
 public:
  explicit MockBackend(std::map<std::string, std::vector<std::string>> script);
  std::vector<std::string> complete(const CompletionRequest& request) override;

 private:
  std::map<std::string, std::vector<std::string>> script_;
};

std::unique_ptr<CompletionBackend> mock_backend(std::map<std::string, std::vector<std::string>> script);
// JSON object {problem_id: [code, ...]}
std::map<std::string, std::vector<std::string>> load_mock_script(const std::string& path);

/// HTTP completion backend: POST {endpoint}/complete with
/// {"prompt", "n", "temperature", "max_new_tokens", "stop", "seed"},
/// expecting {"completions": [...]} of length n.
class HttpBackend final : public CompletionBackend {
 public:
  HttpBackend(std::string endpoint, std::string api_key = {}, std::chrono::seconds timeout = std::chrono::seconds(120));
  // GEN_ENDPOINT, GEN_API_KEY, GEN_TIMEOUT_SECS; InvalidConfig if GEN_ENDPOINT is unset.
  static std::unique_ptr<HttpBackend> from_env();
  std::vector<std::string> complete(const CompletionRequest& request) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

/// |temperatures| x n_samples candidates, ordered temperature-major then
/// sample index, regardless of the order in which requests complete.
std::vector<Candidate> generate(const prompt::Prompt& prompt, const GenerationConfig& cfg, CompletionBackend& backend);

std::string candidate_json(const Candidate& c);
Candidate candidate_from_json(const std::string& line);

}  // namespace privapi::gen
