#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "privapi/apiretriever.hpp"
#include "privapi/benchforge.hpp"
#include "privapi/corpusforge.hpp"
#include "privapi/docstore.hpp"
#include "privapi/error.hpp"
#include "privapi/evalharness.hpp"
#include "privapi/genclient.hpp"
#include "privapi/pipeline.hpp"
#include "privapi/promptkit.hpp"
#include "privapi/service.hpp"
#include "privapi/simd/dot.hpp"
#include "privapi/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace privapi;

namespace {

// Relative paths are taken from PRIVAPI_HOME when it is set.
std::string resolve(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const char* home = std::getenv("PRIVAPI_HOME");
  if (!home || !*home) return path;
  return (fs::path(home) / path).string();
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(Errc::InvalidArgs, what + " is required");
  if (!fs::exists(path)) throw Error(Errc::InvalidArgs, what + " not found: " + path);
}

docstore::DocStore load_store(const std::string& arg) {
  const auto path = resolve(arg);
  require_file(path, "doc dump");
  return docstore::load_doc_dump(path);
}

retriever::ApiIndex load_index(const std::string& arg) {
  const auto path = resolve(arg);
  require_file(path, "index");
  return retriever::ApiIndex::load(path);
}

std::vector<eval::Problem> load_bench(const std::string& arg) {
  const auto path = resolve(arg);
  require_file(path, "benchmark");
  return eval::load_benchmark(path);
}

void emit(const std::string& out_path, std::string_view text) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    const auto parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_file(out_path, text);
  }
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> argv;
  for (std::string w; in >> w;) argv.push_back(w);
  return argv;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(Errc::InvalidArgs, "not a number: " + item);
    out.push_back(v);
  }
  return out;
}

struct EmbedOpts {
  std::size_t dimension = 0;  // 0: from the index, or the default
  std::string endpoint;
};

std::unique_ptr<retriever::Embedder> make_embedder(const EmbedOpts& o, std::size_t fallback_dim) {
  const std::size_t dim = o.dimension ? o.dimension : fallback_dim;
  if (!o.endpoint.empty()) return std::make_unique<retriever::HttpEmbedder>(o.endpoint, dim);
  return std::make_unique<retriever::BaselineEmbedder>(dim);
}

std::unique_ptr<eval::SandboxRunner> make_runner(std::string cmd, const std::vector<std::string>& pythonpath) {
  if (cmd.empty()) {
    if (const char* env = std::getenv("PRIVAPI_RUNNER_CMD")) cmd = env;
  }
  if (!cmd.empty()) return std::make_unique<eval::ProcessRunner>(split_command(cmd));
  std::vector<std::string> paths;
  for (const auto& p : pythonpath) paths.push_back(fs::absolute(resolve(p)).string());
  return std::make_unique<eval::LocalPythonRunner>("python3", paths);
}

std::unique_ptr<gen::CompletionBackend> make_backend(const std::string& mock_script) {
  if (!mock_script.empty()) {
    require_file(mock_script, "--mock-script");
    return gen::mock_backend(gen::load_mock_script(mock_script));
  }
  return gen::HttpBackend::from_env();
}

struct PromptArgs {
  std::string store;
  std::string index;
  std::string setting = "noapi";
  std::size_t top_n = 5;
  std::size_t budget = prompt::kDefaultBudgetChars;
  std::string selections;
  EmbedOpts embed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--store", store, "API doc dump (JSON Lines)");
    cmd->add_option("--index", index, "index file (top-n setting)");
    cmd->add_option("--setting", setting, "noapi | perfect | topn | human")->capture_default_str();
    cmd->add_option("--top-n", top_n, "APIs kept in the top-n setting")->capture_default_str();
    cmd->add_option("--budget", budget, "prompt budget in characters")->capture_default_str();
    cmd->add_option("--selections", selections, "selections JSONL (human setting)");
    cmd->add_option("--embed-endpoint", embed.endpoint, "external embedding service base URL");
  }
};

struct PromptContext {
  docstore::DocStore store;
  std::optional<retriever::ApiIndex> index;
  std::unique_ptr<retriever::Embedder> embedder;
  service::SelectionTable selections;
  pipeline::PromptOptions options;
};

std::unique_ptr<PromptContext> load_prompt_context(const PromptArgs& a) {
  auto ctx = std::make_unique<PromptContext>();
  ctx->options.variant = prompt::parse_variant(a.setting);
  ctx->options.top_n = a.top_n;
  ctx->options.budget_chars = a.budget;
  const auto store_path = resolve(a.store);
  if (ctx->options.variant != prompt::Variant::NoApi) require_file(store_path, "--store");
  if (!store_path.empty()) ctx->store = load_store(a.store);
  if (ctx->options.variant == prompt::Variant::TopN) {
    ctx->index = load_index(a.index);
    ctx->embedder = make_embedder(a.embed, ctx->index->dimension());
    ctx->options.index = &*ctx->index;
    ctx->options.embedder = ctx->embedder.get();
  }
  if (ctx->options.variant == prompt::Variant::Human) {
    const auto sel = resolve(a.selections);
    require_file(sel, "--selections");
    ctx->selections = service::load_selections(sel);
    ctx->options.selections = &ctx->selections;
  }
  return ctx;
}

struct GenArgs {
  std::size_t n = gen::kDefaultSamples;
  std::string temperatures;
  std::size_t max_new_tokens = gen::kDefaultMaxNewTokens;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  std::size_t in_flight = 4;
  std::string mock_script;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-n,--samples", n, "samples per temperature")->capture_default_str();
    cmd->add_option("--temperatures", temperatures, "comma separated (default 0.1..1.0)");
    cmd->add_option("--max-new-tokens", max_new_tokens)->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "max samples per request, 0 = all");
    cmd->add_option("--in-flight", in_flight, "concurrent backend requests")->capture_default_str();
    cmd->add_option("--mock-script", mock_script, "scripted completions JSON instead of GEN_ENDPOINT");
  }

  gen::GenerationConfig config() const {
    gen::GenerationConfig cfg;
    cfg.n_samples = n;
    if (!temperatures.empty()) cfg.temperatures = parse_doubles(temperatures);
    cfg.max_new_tokens = max_new_tokens;
    cfg.seed = seed;
    cfg.batch_size = batch_size;
    cfg.max_in_flight = in_flight;
    cfg.validate();
    return cfg;
  }
};

std::vector<eval::Problem> select_problems(const std::vector<eval::Problem>& all, const std::vector<std::string>& ids) {
  if (ids.empty()) return all;
  std::vector<eval::Problem> out;
  for (const auto& id : ids) out.push_back(eval::find_problem(all, id));
  return out;
}

std::string benchmark_name(const std::vector<eval::Problem>& problems, const std::string& path) {
  if (!problems.empty() && !problems.front().benchmark.empty()) return problems.front().benchmark;
  return fs::path(path).stem().string();
}

void print_error(std::string_view code, const std::string& message, std::optional<std::size_t> line = std::nullopt) {
  json j{{"error", code}, {"message", message}};
  if (line) j["line"] = *line;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privapi: API retrieval, prompting, generation and evaluation for private libraries"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "privapi 0.1.0");

  // ingest
  std::string doc_dump, out_path;
  auto* ingest = app.add_subcommand("ingest", "validate a documentation dump and write the normalized store");
  ingest->add_option("doc_dump", doc_dump, "JSON Lines API records")->required();
  ingest->add_option("-o,--out", out_path, "output path (stdout if omitted)");

  // index
  std::string index_out;
  EmbedOpts index_embed;
  auto* index_cmd = app.add_subcommand("index", "embed every API and write an index file");
  index_cmd->add_option("--store", doc_dump, "API doc dump")->required();
  index_cmd->add_option("-o,--out", index_out, "index file")->required();
  index_cmd->add_option("--dimension", index_embed.dimension, "embedding dimension (default 768)");
  index_cmd->add_option("--embed-endpoint", index_embed.endpoint, "external embedding service base URL");

  // retrieve
  std::string index_path, query_text, problem_id, benchmark_path;
  std::size_t k = 5;
  EmbedOpts retrieve_embed;
  auto* retrieve = app.add_subcommand("retrieve", "rank APIs for a description or a benchmark problem");
  retrieve->add_option("--store", doc_dump, "API doc dump")->required();
  retrieve->add_option("--index", index_path, "index file")->required();
  auto* q_opt = retrieve->add_option("-q,--query", query_text, "natural-language description");
  auto* p_opt = retrieve->add_option("--problem", problem_id, "problem id (needs --benchmark)");
  retrieve->add_option("--benchmark", benchmark_path, "benchmark JSONL");
  retrieve->add_option("-k", k, "number of APIs")->capture_default_str();
  retrieve->add_option("--embed-endpoint", retrieve_embed.endpoint, "external embedding service base URL");
  q_opt->excludes(p_opt);

  // prompt
  PromptArgs prompt_args;
  auto* prompt_cmd = app.add_subcommand("prompt", "assemble the prompt for one problem");
  prompt_cmd->add_option("--benchmark", benchmark_path, "benchmark JSONL")->required();
  prompt_cmd->add_option("--problem", problem_id, "problem id")->required();
  prompt_args.add_to(prompt_cmd);

  // generate
  GenArgs gen_args;
  std::vector<std::string> problem_ids;
  auto* generate_cmd = app.add_subcommand("generate", "prompt every problem and sample completions");
  generate_cmd->add_option("--benchmark", benchmark_path, "benchmark JSONL")->required();
  generate_cmd->add_option("--problem", problem_ids, "restrict to these problem ids");
  generate_cmd->add_option("-o,--out", out_path, "candidates JSONL (stdout if omitted)");
  prompt_args.add_to(generate_cmd);
  gen_args.add_to(generate_cmd);

  // eval
  std::string candidates_path, runner_cmd, out_dir, k_csv;
  std::vector<std::string> pythonpath;
  eval::RunOptions run_options;
  auto* eval_cmd = app.add_subcommand("eval", "run candidates against the benchmark tests and report pass@k");
  eval_cmd->add_option("--benchmark", benchmark_path, "benchmark JSONL")->required();
  eval_cmd->add_option("--problem", problem_ids, "restrict to these problem ids");
  auto* cand_opt = eval_cmd->add_option("--candidates", candidates_path, "candidates JSONL from `generate`");
  eval_cmd->add_option("--k", k_csv, "comma separated k values (default 1,10,100 up to n)");
  eval_cmd->add_option("--runner-cmd", runner_cmd, "external runner command (stdin/stdout JSON protocol)");
  eval_cmd->add_option("--pythonpath", pythonpath, "extra PYTHONPATH entries for the built-in runner");
  eval_cmd->add_option("--timeout", run_options.timeout_secs, "seconds per program")->capture_default_str();
  eval_cmd->add_option("--memory-mb", run_options.memory_limit_mb, "memory limit per program")->capture_default_str();
  eval_cmd->add_option("--workers", run_options.workers, "concurrent programs")->capture_default_str();
  eval_cmd->add_option("--out-dir", out_dir, "write report.json and report.txt here");
  prompt_args.add_to(eval_cmd);
  gen_args.add_to(eval_cmd);
  cand_opt->excludes(eval_cmd->get_option("--mock-script"));

  // convert
  std::string map_path, text_arg, in_path, id_map_path;
  auto* convert = app.add_subcommand("convert", "rename public-library identifiers to their private counterparts");
  convert->add_option("--map", map_path, "keyword map TSV")->required();
  auto* text_opt = convert->add_option("--text", text_arg, "text to convert");
  auto* in_opt = convert->add_option("--in", in_path, "file to convert");
  auto* bench_opt = convert->add_option("--benchmark", benchmark_path, "benchmark JSONL to convert");
  convert->add_option("--id-map", id_map_path, "public -> private api_id TSV (with --benchmark)");
  convert->add_option("-o,--out", out_path, "output path (stdout if omitted)");
  text_opt->excludes(in_opt)->excludes(bench_opt);
  in_opt->excludes(bench_opt);

  // corpus
  std::string corpus_dir, signals_path;
  corpus::CorpusOptions corpus_options;
  auto* corpus_cmd = app.add_subcommand("corpus", "build retrieval training pairs and the cross-merged pretraining corpus");
  corpus_cmd->add_option("--store", doc_dump, "API doc dump")->required();
  corpus_cmd->add_option("--corpus-dir", corpus_dir, "directory of .py files")->required();
  corpus_cmd->add_option("--signals", signals_path, "per-file quality signals JSONL");
  corpus_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  corpus_cmd->add_option("--neg-ratio", corpus_options.neg_ratio)->capture_default_str();
  corpus_cmd->add_option("--noise-rate", corpus_options.noise_rate)->capture_default_str();
  corpus_cmd->add_option("--seed", corpus_options.seed)->capture_default_str();
  corpus_cmd->add_option("--workers", corpus_options.workers)->capture_default_str();

  // validate-manifest
  std::size_t expected_count = 0;
  std::string ratio_arg = "6:3:1";
  auto* manifest = app.add_subcommand("validate-manifest", "check benchmark size and the 1/2/3+ API split");
  manifest->add_option("--benchmark", benchmark_path, "benchmark JSONL")->required();
  manifest->add_option("--count", expected_count, "expected number of problems")->required();
  manifest->add_option("--ratio", ratio_arg, "bucket ratio a:b:c")->capture_default_str();

  // serve
  std::string host = "127.0.0.1", selections_path;
  int port = 8080;
  service::ServiceConfig service_config;
  auto* serve = app.add_subcommand("serve", "HTTP endpoints for human API selection and voting");
  serve->add_option("--store", doc_dump, "API doc dump")->required();
  serve->add_option("--index", index_path, "index file")->required();
  serve->add_option("--benchmark", benchmark_path, "benchmark JSONL")->required();
  serve->add_option("--selections", selections_path, "append-only selections JSONL")->required();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str();
  serve->add_option("--mock-script", gen_args.mock_script, "scripted completions JSON instead of GEN_ENDPOINT");
  serve->add_option("--runner-cmd", runner_cmd, "external runner command");
  serve->add_option("--pythonpath", pythonpath, "extra PYTHONPATH entries for the built-in runner");
  serve->add_option("--embed-endpoint", retrieve_embed.endpoint, "external embedding service base URL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("InvalidArgs", e.what());
    return 1;
  }

  try {
    if (*ingest) {
      auto store = load_store(doc_dump);
      emit(resolve(out_path), docstore::serialize_store(store));
      json summary{{"records", store.size()}};
      if (!out_path.empty()) std::cout << summary.dump() << '\n';
    } else if (*index_cmd) {
      auto store = load_store(doc_dump);
      auto embedder = make_embedder(index_embed, retriever::kDefaultDimension);
      auto index = retriever::build_index(store, *embedder);
      const auto out = resolve(index_out);
      if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
      index.save(out);
      std::cout << json{{"entries", index.size()}, {"dimension", index.dimension()}, {"fingerprint", index.fingerprint()},
                        {"kernel", simd::isa_name(simd::active_isa())}}
                       .dump()
                << '\n';
    } else if (*retrieve) {
      auto store = load_store(doc_dump);
      auto index = load_index(index_path);
      auto embedder = make_embedder(retrieve_embed, index.dimension());
      std::string text = query_text;
      if (!problem_id.empty()) {
        auto problems = load_bench(benchmark_path);
        text = eval::problem_description(eval::find_problem(problems, problem_id));
      } else if (q_opt->count() == 0) {
        throw Error(Errc::InvalidArgs, "give --query or --problem");
      }
      auto ranking = retriever::query(index, text, k, *embedder, problem_id);
      json out = json::array();
      for (const auto& s : ranking.ranked) {
        const auto& rec = store.at(s.api_id);
        out.push_back({{"api_id", s.api_id}, {"name", rec.name}, {"description", rec.description_first}, {"score", s.score}});
      }
      std::cout << out.dump(2) << '\n';
    } else if (*prompt_cmd) {
      auto problems = load_bench(benchmark_path);
      auto ctx = load_prompt_context(prompt_args);
      auto prompts = pipeline::build_prompts({eval::find_problem(problems, problem_id)}, ctx->store, ctx->options);
      std::cout << prompts.front().text;
      if (prompts.front().dropped_apis > 0) {
        std::cerr << json{{"warning", "budget"}, {"dropped_apis", prompts.front().dropped_apis}}.dump() << '\n';
      }
    } else if (*generate_cmd) {
      auto problems = select_problems(load_bench(benchmark_path), problem_ids);
      auto ctx = load_prompt_context(prompt_args);
      auto cfg = gen_args.config();
      auto backend = make_backend(resolve(gen_args.mock_script));
      auto candidates = pipeline::generate_all(pipeline::build_prompts(problems, ctx->store, ctx->options), cfg, *backend);
      std::string text;
      for (const auto& c : candidates) text += gen::candidate_json(c) + "\n";
      emit(resolve(out_path), text);
    } else if (*eval_cmd) {
      const auto bench_file = resolve(benchmark_path);
      auto problems = select_problems(load_bench(benchmark_path), problem_ids);
      std::vector<gen::Candidate> candidates;
      std::string setting_label;
      if (!candidates_path.empty()) {
        require_file(resolve(candidates_path), "--candidates");
        candidates = pipeline::load_candidates(resolve(candidates_path));
        setting_label = "-";
      } else {
        auto ctx = load_prompt_context(prompt_args);
        auto cfg = gen_args.config();
        auto backend = make_backend(resolve(gen_args.mock_script));
        auto prompts = pipeline::build_prompts(problems, ctx->store, ctx->options);
        setting_label = prompts.empty() ? "-" : prompts.front().setting.label();
        candidates = pipeline::generate_all(prompts, cfg, *backend);
      }
      std::vector<std::size_t> k_list;
      if (k_csv.empty()) {
        std::map<std::string, std::size_t> per_problem;
        for (const auto& c : candidates) per_problem[c.problem_id + "@" + std::to_string(c.temperature)]++;
        std::size_t min_n = per_problem.empty() ? 0 : SIZE_MAX;
        for (const auto& [_, n] : per_problem) min_n = std::min(min_n, n);
        k_list = pipeline::default_k_list(min_n);
      } else {
        for (double v : parse_doubles(k_csv)) {
          if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) throw Error(Errc::InvalidArgs, "k must be a positive integer");
          k_list.push_back(static_cast<std::size_t>(v));
        }
      }
      if (k_list.empty()) throw Error(Errc::InvalidArgs, "no usable k value");
      auto runner = make_runner(runner_cmd, pythonpath);
      auto report = eval::evaluate(benchmark_name(problems, bench_file), problems, candidates, *runner, k_list, run_options);
      const auto report_text = eval::report_json(report);
      const std::vector<eval::EvalReport> reports{report};
      const std::vector<std::string> settings{setting_label};
      const auto table = eval::report_table(reports, settings);
      if (!out_dir.empty()) {
        const auto dir = resolve(out_dir);
        fs::create_directories(dir);
        write_file((fs::path(dir) / "report.json").string(), report_text);
        write_file((fs::path(dir) / "report.txt").string(), table);
        std::cout << table;
      } else {
        std::cout << report_text;
      }
    } else if (*convert) {
      auto map = bench::load_keyword_map(resolve(map_path));
      if (!benchmark_path.empty()) {
        auto problems = load_bench(benchmark_path);
        std::map<std::string, std::string> ids;
        if (!id_map_path.empty()) ids = bench::load_id_translation(resolve(id_map_path));
        std::string text;
        for (const auto& p : bench::convert_benchmark(problems, map, ids)) text += eval::problem_json(p) + "\n";
        emit(resolve(out_path), text);
      } else {
        std::string source;
        if (!in_path.empty()) {
          source = read_file(resolve(in_path));
        } else if (*text_opt) {
          source = text_arg;
        } else {
          std::ostringstream ss;
          ss << std::cin.rdbuf();
          source = ss.str();
        }
        auto [converted, report] = bench::convert_text(source, map);
        emit(resolve(out_path), converted);
        if (*text_opt && out_path.empty()) std::cout << '\n';
        std::cerr << json{{"replaced", report.replaced}}.dump() << '\n';
      }
    } else if (*corpus_cmd) {
      auto store = load_store(doc_dump);
      std::map<std::string, corpus::SignalsEntry> signals;
      if (!signals_path.empty()) signals = corpus::load_signals(resolve(signals_path));
      auto outputs = corpus::build_corpus(resolve(corpus_dir), signals, store, corpus_options);
      const fs::path dir = resolve(out_dir);
      fs::create_directories(dir / "pretrain");
      std::string examples, docs;
      for (const auto& e : outputs.examples) examples += corpus::retrieval_example_json(e) + "\n";
      for (const auto& d : outputs.documents) {
        docs += corpus::pretrain_document_json(d) + "\n";
        const auto target = dir / "pretrain" / d.file_id;
        fs::create_directories(target.parent_path());
        write_file(target.string(), corpus::render_pretrain_text(d));
      }
      write_file((dir / "retrieval.jsonl").string(), examples);
      write_file((dir / "pretrain.jsonl").string(), docs);
      std::cout << json{{"examples", outputs.examples.size()},
                        {"documents", outputs.documents.size()},
                        {"skipped_files", outputs.skipped_files}}
                       .dump()
                << '\n';
    } else if (*manifest) {
      std::array<std::size_t, 3> ratio{};
      {
        std::stringstream ss(ratio_arg);
        std::string part;
        std::size_t i = 0;
        while (std::getline(ss, part, ':')) {
          if (i >= 3) throw Error(Errc::InvalidArgs, "ratio needs three parts");
          try {
            ratio[i++] = std::stoul(part);
          } catch (const std::exception&) {
            throw Error(Errc::InvalidArgs, "bad ratio " + ratio_arg);
          }
        }
        if (i != 3) throw Error(Errc::InvalidArgs, "ratio needs three parts");
      }
      auto problems = load_bench(benchmark_path);
      auto v = bench::validate_manifest(problems, expected_count, ratio);
      json buckets = json::array();
      for (const auto& b : v.buckets) {
        buckets.push_back({{"bucket", b.bucket}, {"actual", b.actual}, {"expected", b.expected}, {"delta", b.delta}, {"ok", b.ok}});
      }
      std::cout << json{{"count", v.count}, {"expected_count", v.expected_count}, {"count_ok", v.count_ok},
                        {"ratio_ok", v.ratio_ok}, {"buckets", buckets}}
                       .dump(2)
                << '\n';
      if (!v.ok()) {
        std::string msg;
        for (const auto& f : v.failures()) msg += (msg.empty() ? "" : "; ") + f;
        print_error("InvalidManifest", msg);
        return 1;
      }
    } else if (*serve) {
      auto store = load_store(doc_dump);
      auto index = load_index(index_path);
      auto embedder = make_embedder(retrieve_embed, index.dimension());
      auto problems = load_bench(benchmark_path);
      auto backend = make_backend(resolve(gen_args.mock_script));
      auto runner = make_runner(runner_cmd, pythonpath);
      service_config.selections_path = resolve(selections_path);
      service::Service svc(store, index, *embedder, problems, *backend, *runner, service_config);

      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);
      httplib::Server* running = nullptr;
      std::jthread waiter;
      service::serve(svc, host, port, [&](httplib::Server& server, int bound) {
        running = &server;
        std::cout << json{{"listening", host + ":" + std::to_string(bound)}}.dump() << std::endl;
        waiter = std::jthread([&set, running] {
          int sig = 0;
          sigwait(&set, &sig);
          running->stop();
        });
      });
      // the waiter may still be parked in sigwait if the server stopped on its own
      if (waiter.joinable()) {
        pthread_kill(waiter.native_handle(), SIGTERM);
      }
    }
  } catch (const Error& e) {
    print_error(errc_name(e.code()), e.message(), e.line());
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 2;
  }
  return 0;
}
