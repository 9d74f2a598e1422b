#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "privapi/genclient.hpp"

namespace privapi::eval {

inline constexpr double kDefaultTimeoutSecs = 10.0;
inline constexpr long kDefaultMemoryLimitMb = 4096;

struct Problem {
  std::string problem_id;
  std::string benchmark;
  std::string context;             // x
  std::string canonical_solution;  // y
  std::string test_code;
  std::vector<std::string> golden_api_ids;
  std::size_t num_apis = 1;
};

void validate_problem(const Problem& p);  // throws InvalidArgs
std::vector<Problem> load_benchmark(const std::string& path);
std::vector<Problem> parse_benchmark(std::string_view jsonl);
std::string problem_json(const Problem& p);
const Problem& find_problem(const std::vector<Problem>& problems, std::string_view problem_id);  // UnknownProblem

// Natural-language part of the context: its comments and docstrings.
std::string problem_description(const Problem& p);

// context + code, then the tests after a blank line
std::string build_program(const Problem& p, std::string_view code);

enum class Verdict { Pass, Fail, Timeout, Crash };
std::string_view verdict_name(Verdict v) noexcept;
Verdict parse_verdict(std::string_view name);

struct RunRequest {
  std::string program_text;
  double timeout_secs = kDefaultTimeoutSecs;
  long memory_limit_mb = kDefaultMemoryLimitMb;
};

struct RunVerdict {
  Verdict status = Verdict::Crash;
  double duration_secs = 0.0;
  std::string message;  // at most 2000 chars
};

inline constexpr std::size_t kMaxMessageChars = 2000;

std::string run_request_json(const RunRequest& r);
RunVerdict run_verdict_from_json(std::string_view text);  // throws InvalidArgs

class SandboxRunner {
 public:
  virtual ~SandboxRunner() = default;
  // Candidate misbehaviour is a verdict; only an unusable runner throws
  // (RunnerUnavailable).
  virtual RunVerdict run(const RunRequest& request) = 0;
};

/// Talks to an external runner process: one RunRequest JSON object on its
/// stdin, one RunVerdict JSON object back on stdout, a fresh process per run.
/// A runner that hangs past timeout + grace, exits nonzero or prints
/// something unparseable yields a crash verdict.
class ProcessRunner final : public SandboxRunner {
 public:
  explicit ProcessRunner(std::vector<std::string> command, double grace_secs = 5.0);
  RunVerdict run(const RunRequest& request) override;

 private:
  std::vector<std::string> command_;
  double grace_secs_;
};

/// Runs the program directly with a Python interpreter under CPU, memory and
/// wall-clock limits. Used when no external runner is configured.
/// Exit 0 is a pass, an AssertionError a fail, any other error a crash.
class LocalPythonRunner final : public SandboxRunner {
 public:
  explicit LocalPythonRunner(std::string python = "python3", std::vector<std::string> python_path = {});
  RunVerdict run(const RunRequest& request) override;

 private:
  std::string python_;
  std::vector<std::string> python_path_;
};

struct ProblemResult {
  std::string problem_id;
  double temperature = 0.0;
  std::size_t n = 0;
  std::size_t c = 0;
  std::vector<Verdict> verdicts;  // indexed by sample_index

  std::size_t count(Verdict v) const;
};

/// Unbiased pass@k: 1 when n - c < k, otherwise 1 - prod_{i=n-c+1}^{n} (1 - k/i).
/// Exact rational arithmetic for n <= 64, log space above.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

struct RunOptions {
  double timeout_secs = kDefaultTimeoutSecs;
  long memory_limit_mb = kDefaultMemoryLimitMb;
  std::size_t workers = 1;
};

// One result per temperature, ascending.
std::vector<ProblemResult> run_problem(const Problem& problem, std::span<const gen::Candidate> candidates,
                                       SandboxRunner& runner, const RunOptions& options = {});

struct TemperatureScore {
  double temperature = 0.0;
  double pass_at_k = 0.0;  // mean over problems at this temperature
};
std::vector<TemperatureScore> pass_at_k_by_temperature(std::span<const ProblemResult> results, std::size_t k);
// Max over temperatures of the benchmark-level mean pass@k.
double best_over_temperatures(std::span<const ProblemResult> results, std::size_t k);

struct BucketStats {
  std::size_t solved = 0;
  std::size_t total = 0;
  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(solved) / static_cast<double>(total); }
};
// "1", "2", "3+" by num_apis; empty buckets are omitted. A problem is
// solved if any sample at any temperature passed.
std::map<std::string, BucketStats> difficulty_breakdown(std::span<const ProblemResult> results, std::span<const Problem> problems);
std::string difficulty_bucket(std::size_t num_apis);

struct EvalReport {
  std::string benchmark;
  std::vector<ProblemResult> per_problem;  // every (problem, temperature), sorted
  std::map<std::size_t, double> pass_at;
  std::map<std::size_t, double> best_temperature;
  std::map<std::string, BucketStats> difficulty_buckets;
};

EvalReport evaluate(std::string benchmark, std::span<const Problem> problems, std::span<const gen::Candidate> candidates,
                    SandboxRunner& runner, std::span<const std::size_t> k_list, const RunOptions& options = {});

std::string report_json(const EvalReport& report);  // pretty, stable key order, no timings
// Benchmark, setting and pass@k columns in percent, one row per report.
std::string report_table(std::span<const EvalReport> reports, std::span<const std::string> settings);

}  // namespace privapi::eval
