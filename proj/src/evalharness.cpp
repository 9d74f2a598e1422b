#include "privapi/evalharness.hpp"

#include <signal.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"

#include "privapi/error.hpp"
#include "privapi/process.hpp"
#include "privapi/util.hpp"

namespace privapi::eval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string truncate_message(std::string_view text) {
  if (text.size() <= kMaxMessageChars) return std::string(text);
  return std::string(text.substr(text.size() - kMaxMessageChars));
}

std::string last_nonempty_line(std::string_view text) {
  auto lines = split_lines(text);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto t = trim(*it);
    if (!t.empty()) return t;
  }
  return {};
}

Problem problem_from_json(const json& j, std::size_t line_no) {
  try {
    Problem p;
    p.problem_id = j.at("problem_id").get<std::string>();
    p.benchmark = j.value("benchmark", std::string{});
    p.context = j.at("context").get<std::string>();
    p.canonical_solution = j.value("canonical_solution", std::string{});
    p.test_code = j.at("test").get<std::string>();
    p.golden_api_ids = j.value("golden_api_ids", std::vector<std::string>{});
    p.num_apis = j.value("num_apis", p.golden_api_ids.empty() ? std::size_t{1} : p.golden_api_ids.size());
    validate_problem(p);
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgs, "benchmark line " + std::to_string(line_no) + ": " + e.what(), line_no);
  }
}

}  // namespace

void validate_problem(const Problem& p) {
  if (p.problem_id.empty()) throw Error(Errc::InvalidArgs, "problem without an id");
  if (p.context.empty()) throw Error(Errc::InvalidArgs, p.problem_id + ": empty context");
  if (p.test_code.empty()) throw Error(Errc::InvalidArgs, p.problem_id + ": empty test code");
  if (p.num_apis == 0) throw Error(Errc::InvalidArgs, p.problem_id + ": num_apis must be >= 1");
  if (!p.golden_api_ids.empty() && p.golden_api_ids.size() != p.num_apis) {
    throw Error(Errc::InvalidArgs, p.problem_id + ": num_apis disagrees with golden_api_ids");
  }
}

std::vector<Problem> parse_benchmark(std::string_view jsonl) {
  std::vector<Problem> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(jsonl)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgs, "benchmark line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    auto p = problem_from_json(j, line_no);
    if (!ids.insert(p.problem_id).second) throw Error(Errc::InvalidArgs, "duplicate problem id " + p.problem_id, line_no);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Problem> load_benchmark(const std::string& path) { return parse_benchmark(read_file(path)); }

std::string problem_json(const Problem& p) {
  ordered_json j;
  j["problem_id"] = p.problem_id;
  j["benchmark"] = p.benchmark;
  j["context"] = p.context;
  j["canonical_solution"] = p.canonical_solution;
  j["test"] = p.test_code;
  j["golden_api_ids"] = p.golden_api_ids;
  j["num_apis"] = p.num_apis;
  return j.dump();
}

const Problem& find_problem(const std::vector<Problem>& problems, std::string_view problem_id) {
  for (const auto& p : problems) {
    if (p.problem_id == problem_id) return p;
  }
  throw Error(Errc::UnknownProblem, std::string(problem_id));
}

std::string problem_description(const Problem& p) {
  std::string text;
  const std::string& ctx = p.context;
  std::size_t i = 0;
  while (i < ctx.size()) {
    if (ctx.compare(i, 3, "\"\"\"") == 0 || ctx.compare(i, 3, "'''") == 0) {
      const auto close = ctx.find(ctx.substr(i, 3), i + 3);
      const auto end = close == std::string::npos ? ctx.size() : close;
      text += ctx.substr(i + 3, end - i - 3);
      text += ' ';
      i = close == std::string::npos ? ctx.size() : close + 3;
    } else if (ctx[i] == '#') {
      auto eol = ctx.find('\n', i);
      if (eol == std::string::npos) eol = ctx.size();
      std::size_t b = i;
      while (b < eol && ctx[b] == '#') ++b;
      text += ctx.substr(b, eol - b);
      text += ' ';
      i = eol;
    } else if (ctx[i] == '"' || ctx[i] == '\'') {
      const auto close = ctx.find(ctx[i], i + 1);
      i = close == std::string::npos ? ctx.size() : close + 1;
    } else {
      ++i;
    }
  }
  auto description = normalize_whitespace(text);
  return description.empty() ? normalize_whitespace(ctx) : description;
}

std::string build_program(const Problem& p, std::string_view code) {
  std::string program = p.context;
  program += code;
  if (program.empty() || program.back() != '\n') program += '\n';
  program += '\n';
  program += p.test_code;
  if (program.back() != '\n') program += '\n';
  return program;
}

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Timeout: return "timeout";
    case Verdict::Crash: return "crash";
  }
  return "crash";
}

Verdict parse_verdict(std::string_view name) {
  for (auto v : {Verdict::Pass, Verdict::Fail, Verdict::Timeout, Verdict::Crash}) {
    if (verdict_name(v) == name) return v;
  }
  throw Error(Errc::InvalidArgs, "unknown verdict \"" + std::string(name) + "\"");
}

std::string run_request_json(const RunRequest& r) {
  ordered_json j;
  j["program_text"] = r.program_text;
  j["timeout_secs"] = r.timeout_secs;
  j["memory_limit_mb"] = r.memory_limit_mb;
  return j.dump();
}

RunVerdict run_verdict_from_json(std::string_view text) {
  try {
    auto j = json::parse(text);
    RunVerdict v;
    v.status = parse_verdict(j.at("status").get<std::string>());
    v.duration_secs = j.value("duration_secs", 0.0);
    v.message = truncate_message(j.value("message", std::string{}));
    return v;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgs, std::string("malformed verdict: ") + e.what());
  }
}

ProcessRunner::ProcessRunner(std::vector<std::string> command, double grace_secs)
    : command_(std::move(command)), grace_secs_(grace_secs) {
  if (command_.empty()) throw Error(Errc::InvalidConfig, "runner command is empty");
}

RunVerdict ProcessRunner::run(const RunRequest& request) {
  if (!(request.timeout_secs > 0.0)) throw Error(Errc::InvalidArgs, "timeout must be > 0");
  ProcessOptions opts;
  opts.argv = command_;
  opts.stdin_data = run_request_json(request);
  opts.wall_timeout_secs = request.timeout_secs + grace_secs_;
  const auto res = run_process(opts);

  RunVerdict crash;
  crash.status = Verdict::Crash;
  crash.duration_secs = res.duration_secs;
  if (res.timed_out) {
    crash.message = "runner gave no verdict within " + format_fixed(opts.wall_timeout_secs, 1) + "s";
    return crash;
  }
  if (res.term_signal != 0 || res.exit_code != 0) {
    crash.message = truncate_message("runner failed (" +
                                     (res.term_signal ? "signal " + std::to_string(res.term_signal) : "exit " + std::to_string(res.exit_code)) +
                                     "): " + res.err);
    return crash;
  }
  try {
    return run_verdict_from_json(trim(res.out));
  } catch (const Error& e) {
    crash.message = truncate_message("protocol error: " + e.message());
    return crash;
  }
}

LocalPythonRunner::LocalPythonRunner(std::string python, std::vector<std::string> python_path)
    : python_(std::move(python)), python_path_(std::move(python_path)) {}

RunVerdict LocalPythonRunner::run(const RunRequest& request) {
  if (!(request.timeout_secs > 0.0)) throw Error(Errc::InvalidArgs, "timeout must be > 0");
  ProcessOptions opts;
  opts.argv = {python_, "-B", "-"};
  opts.stdin_data = request.program_text;
  opts.wall_timeout_secs = request.timeout_secs;
  opts.cpu_limit_secs = static_cast<long>(std::ceil(request.timeout_secs)) + 1;
  opts.memory_limit_mb = request.memory_limit_mb;
  std::string path;
  for (const auto& p : python_path_) path += (path.empty() ? "" : ":") + p;
  if (const char* existing = std::getenv("PYTHONPATH"); existing && *existing) path += (path.empty() ? "" : ":") + std::string(existing);
  if (!path.empty()) opts.env["PYTHONPATH"] = path;
  opts.env["PYTHONDONTWRITEBYTECODE"] = "1";
  opts.env["PYTHONHASHSEED"] = "0";
  opts.env["OPENBLAS_NUM_THREADS"] = "1";
  opts.env["OMP_NUM_THREADS"] = "1";
  const auto res = run_process(opts);

  RunVerdict v;
  v.duration_secs = res.duration_secs;
  v.message = truncate_message(res.err);
  if (res.timed_out || res.term_signal == SIGXCPU || res.term_signal == SIGKILL) {
    v.status = Verdict::Timeout;
  } else if (res.term_signal == 0 && res.exit_code == 0) {
    v.status = Verdict::Pass;
  } else if (last_nonempty_line(res.err).starts_with("AssertionError")) {
    v.status = Verdict::Fail;
  } else {
    v.status = Verdict::Crash;
  }
  return v;
}

std::size_t ProblemResult::count(Verdict v) const {
  return static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), v));
}

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
  if (c > n || k == 0 || k > n) {
    throw Error(Errc::InvalidArgs, "pass@k needs 0 <= c <= n and 1 <= k <= n (n=" + std::to_string(n) +
                                       ", c=" + std::to_string(c) + ", k=" + std::to_string(k) + ")");
  }
  if (n - c < k) return 1.0;
  if (n <= 64) {
    // running fraction num/den stays <= C(64, 32) after reduction
    unsigned __int128 num = 1, den = 1;
    for (std::size_t i = n - c + 1; i <= n; ++i) {
      num *= i - k;
      den *= i;
      auto a = num, b = den;
      while (b != 0) {
        auto t = a % b;
        a = b;
        b = t;
      }
      num /= a;
      den /= a;
    }
    return static_cast<double>(den - num) / static_cast<double>(den);
  }
  double log_prod = 0.0;
  for (std::size_t i = n - c + 1; i <= n; ++i) log_prod += std::log1p(-static_cast<double>(k) / static_cast<double>(i));
  return -std::expm1(log_prod);
}

std::vector<ProblemResult> run_problem(const Problem& problem, std::span<const gen::Candidate> candidates,
                                       SandboxRunner& runner, const RunOptions& options) {
  std::map<double, std::vector<const gen::Candidate*>> by_temperature;
  for (const auto& c : candidates) {
    if (c.problem_id != problem.problem_id) {
      throw Error(Errc::InvalidArgs, "candidate for " + c.problem_id + " passed with problem " + problem.problem_id);
    }
    by_temperature[c.temperature].push_back(&c);
  }

  std::vector<ProblemResult> results;
  std::vector<std::pair<std::size_t, const gen::Candidate*>> jobs;  // (result index, candidate)
  for (auto& [temperature, list] : by_temperature) {
    ProblemResult r;
    r.problem_id = problem.problem_id;
    r.temperature = temperature;
    r.n = list.size();
    r.verdicts.assign(r.n, Verdict::Crash);
    std::vector<bool> seen(r.n, false);
    for (const auto* c : list) {
      if (c->sample_index >= r.n || seen[c->sample_index]) {
        throw Error(Errc::InvalidArgs, problem.problem_id + ": sample indices must be 0..n-1 without repeats");
      }
      seen[c->sample_index] = true;
      jobs.emplace_back(results.size(), c);
    }
    results.push_back(std::move(r));
  }

  parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
    const auto& [ri, cand] = jobs[j];
    RunRequest req{build_program(problem, cand->code), options.timeout_secs, options.memory_limit_mb};
    results[ri].verdicts[cand->sample_index] = runner.run(req).status;
  });
  for (auto& r : results) r.c = r.count(Verdict::Pass);
  return results;
}

std::vector<TemperatureScore> pass_at_k_by_temperature(std::span<const ProblemResult> results, std::size_t k) {
  std::map<double, std::pair<double, std::size_t>> sums;
  for (const auto& r : results) {
    auto& [sum, count] = sums[r.temperature];
    sum += pass_at_k(r.n, r.c, k);
    ++count;
  }
  std::vector<TemperatureScore> out;
  for (const auto& [t, acc] : sums) out.push_back({t, acc.first / static_cast<double>(acc.second)});
  return out;
}

double best_over_temperatures(std::span<const ProblemResult> results, std::size_t k) {
  if (results.empty()) throw Error(Errc::EmptyResults, "no results to aggregate");
  double best = 0.0;
  for (const auto& s : pass_at_k_by_temperature(results, k)) best = std::max(best, s.pass_at_k);
  return best;
}

std::string difficulty_bucket(std::size_t num_apis) {
  if (num_apis <= 1) return "1";
  if (num_apis == 2) return "2";
  return "3+";
}

std::map<std::string, BucketStats> difficulty_breakdown(std::span<const ProblemResult> results, std::span<const Problem> problems) {
  std::map<std::string, const Problem*> by_id;
  for (const auto& p : problems) by_id[p.problem_id] = &p;
  std::map<std::string, bool> solved;
  for (const auto& r : results) {
    if (!by_id.contains(r.problem_id)) throw Error(Errc::JoinFailure, "result for unknown problem " + r.problem_id);
    solved[r.problem_id] = solved[r.problem_id] || r.c > 0;
  }
  std::map<std::string, BucketStats> buckets;
  for (const auto& [id, ok] : solved) {
    auto& b = buckets[difficulty_bucket(by_id[id]->num_apis)];
    ++b.total;
    if (ok) ++b.solved;
  }
  return buckets;
}

EvalReport evaluate(std::string benchmark, std::span<const Problem> problems, std::span<const gen::Candidate> candidates,
                    SandboxRunner& runner, std::span<const std::size_t> k_list, const RunOptions& options) {
  std::map<std::string, std::vector<gen::Candidate>> grouped;
  std::set<std::string> known;
  for (const auto& p : problems) known.insert(p.problem_id);
  for (const auto& c : candidates) {
    if (!known.contains(c.problem_id)) throw Error(Errc::JoinFailure, "candidate for unknown problem " + c.problem_id);
    grouped[c.problem_id].push_back(c);
  }

  EvalReport report;
  report.benchmark = std::move(benchmark);
  for (const auto& p : problems) {
    auto it = grouped.find(p.problem_id);
    if (it == grouped.end()) throw Error(Errc::InvalidArgs, "no candidates for problem " + p.problem_id);
    auto results = run_problem(p, it->second, runner, options);
    report.per_problem.insert(report.per_problem.end(), results.begin(), results.end());
  }
  if (report.per_problem.empty()) throw Error(Errc::EmptyResults, "benchmark has no problems");

  for (std::size_t k : k_list) {
    auto scores = pass_at_k_by_temperature(report.per_problem, k);
    auto best = std::max_element(scores.begin(), scores.end(),
                                 [](const auto& a, const auto& b) { return a.pass_at_k < b.pass_at_k; });
    report.pass_at[k] = best->pass_at_k;
    report.best_temperature[k] = best->temperature;
  }
  report.difficulty_buckets = difficulty_breakdown(report.per_problem, problems);
  return report;
}

std::string report_json(const EvalReport& report) {
  ordered_json j;
  j["benchmark"] = report.benchmark;
  ordered_json pass_at = ordered_json::object();
  ordered_json best_t = ordered_json::object();
  for (const auto& [k, v] : report.pass_at) pass_at[std::to_string(k)] = v;
  for (const auto& [k, t] : report.best_temperature) best_t[std::to_string(k)] = t;
  j["pass_at"] = std::move(pass_at);
  j["best_temperature"] = std::move(best_t);
  ordered_json buckets = ordered_json::object();
  for (const auto& [name, b] : report.difficulty_buckets) {
    ordered_json e;
    e["solved"] = b.solved;
    e["total"] = b.total;
    e["fraction"] = b.fraction();
    buckets[name] = std::move(e);
  }
  j["difficulty"] = std::move(buckets);
  ordered_json per = ordered_json::array();
  for (const auto& r : report.per_problem) {
    ordered_json e;
    e["problem_id"] = r.problem_id;
    e["temperature"] = r.temperature;
    e["n"] = r.n;
    e["c"] = r.c;
    std::vector<std::string> v;
    for (auto x : r.verdicts) v.emplace_back(verdict_name(x));
    e["verdicts"] = v;
    per.push_back(std::move(e));
  }
  j["per_problem"] = std::move(per);
  return j.dump(2) + "\n";
}

std::string report_table(std::span<const EvalReport> reports, std::span<const std::string> settings) {
  std::set<std::size_t> ks;
  for (const auto& r : reports) {
    for (const auto& [k, _] : r.pass_at) ks.insert(k);
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Benchmark", "APIs"};
  for (auto k : ks) header.push_back("pass@" + std::to_string(k));
  rows.push_back(header);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::vector<std::string> row{reports[i].benchmark, i < settings.size() ? settings[i] : "-"};
    for (auto k : ks) {
      auto it = reports[i].pass_at.find(k);
      row.push_back(it == reports[i].pass_at.end() ? "-" : format_fixed(it->second * 100.0, 2));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) out += " | ";
      const auto& cell = rows[r][c];
      if (c < 2) {
        out += cell + std::string(width[c] - cell.size(), ' ');
      } else {
        out += std::string(width[c] - cell.size(), ' ') + cell;
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) {
        if (c > 0) out += "-+-";
        out += std::string(width[c], '-');
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace privapi::eval
