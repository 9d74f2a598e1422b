#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "privapi/corpusforge.hpp"
#include "privapi/error.hpp"
#include "support.hpp"

using namespace privapi;
using namespace privapi::corpus;
using docstore::ApiRecord;
using docstore::DocStore;

namespace {

ApiRecord rec(const std::string& library, const std::string& name, const std::string& desc = "Does a thing.") {
  ApiRecord r;
  r.api_id = library + "." + name;
  r.library = library;
  r.name = name;
  r.signature = "x";
  r.description_full = desc;
  r.description_first = docstore::first_sentence(desc);
  return r;
}

DocStore twenty_api_store() {
  std::vector<ApiRecord> records;
  for (int i = 0; i < 20; ++i) records.push_back(rec("lib", "fn" + std::to_string(i)));
  records.push_back(rec("other", "fn0"));
  return DocStore(records);
}

const DocStore& fixture_store() {
  static const DocStore store = docstore::load_doc_dump(testing::fixture("docs.jsonl"));
  return store;
}

std::vector<std::string> non_blank_lines(std::string_view text) {
  std::vector<std::string> out;
  for (auto& l : split_lines(text)) {
    if (!trim(l).empty()) out.push_back(l);
  }
  return out;
}

// every non-blank line of the source lands in exactly one block, in order
void check_coverage(std::string_view source) {
  auto blocks = segment_blocks(source);
  std::vector<std::string> from_blocks;
  for (const auto& b : blocks) {
    for (auto& l : non_blank_lines(b.text)) from_blocks.push_back(l);
  }
  auto expected = non_blank_lines(source);
  // a final line without '\n' is kept as is in both
  CHECK(from_blocks == expected);
  for (std::size_t i = 1; i < blocks.size(); ++i) CHECK(blocks[i].first_line > blocks[i - 1].last_line);
}

FileQualitySignals sig(std::uint64_t stars, double rate, std::uint64_t n, std::uint64_t m) {
  FileQualitySignals s;
  s.star_count = stars;
  s.unit_test_rate = rate;
  s.api_name_count = n;
  s.api_match_count = m;
  return s;
}

}  // namespace

TEST_CASE("a class with three methods is one block") {
  const char* src =
      "import os\n"
      "\n"
      "class Frame:\n"
      "    def a(self):\n"
      "        return 1\n"
      "\n"
      "    def b(self):\n"
      "        return 2\n"
      "\n"
      "    def c(self):\n"
      "        return 3\n";
  auto blocks = segment_blocks(src, "f.py");
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].kind == BlockKind::Module);
  CHECK(blocks[1].kind == BlockKind::Definition);
  CHECK(blocks[1].block_id == "f.py#1");
  CHECK(blocks[1].text.find("def c(self)") != std::string::npos);
}

TEST_CASE("decorators and comments directly above a def join it") {
  const char* src =
      "x = 1\n"
      "# merge two frames\n"
      "@cache\n"
      "@other(1,\n"
      "       2)\n"
      "def merge(a, b):\n"
      "    return a\n"
      "y = merge(1, 2)\n";
  auto blocks = segment_blocks(src);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].text == "x = 1\n");
  CHECK(blocks[1].text.starts_with("# merge two frames\n@cache\n"));
  CHECK(extract_nl_description(blocks[1]) == "merge two frames");
  CHECK(blocks[2].text == "y = merge(1, 2)\n");
}

TEST_CASE("description prefers the docstring, then leading comments, then body comments") {
  auto one = [](const char* src) { return extract_nl_description(segment_blocks(src).front()); };
  CHECK(one("# outer words\ndef f():\n    \"\"\"Inner  doc\n    text.\"\"\"\n    return 1\n") == "Inner doc text.");
  CHECK(one("# merge two frames\n#   and more\ndef f():\n    return 1\n") == "merge two frames and more");
  CHECK(one("def f():\n    # sort the values\n    return 1\n") == "sort the values");
  CHECK(one("def f():\n    return 1\n") == "");
  CHECK(one("async def f():\n    '''Single quoted doc.'''\n") == "Single quoted doc.");
}

TEST_CASE("segmentation covers every non-blank line") {
  check_coverage("import a\n\n\ndef f(x):\n    s = '''\ndef not_a_def():\n'''\n    return x\n\n# trailing\n");
  check_coverage("x = [\n1,\n2]\ndef g(): pass\nclass C(\n    Base):\n    pass\n\n\n");
  check_coverage("@d\n\ndef f():\n    pass\nz = 1");
  check_coverage("# only a comment\n");
  check_coverage("if x:\n    def inner():\n        pass\nelse:\n    pass\n");
  for (const auto& entry : std::filesystem::recursive_directory_iterator(testing::fixture("corpus"))) {
    if (entry.is_regular_file()) check_coverage(read_file(entry.path().string()));
  }
}

TEST_CASE("whitespace-only files are rejected") {
  CHECK_THROWS_AS(segment_blocks(""), Error);
  try {
    segment_blocks(" \n\t\n");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyFile);
  }
}

TEST_CASE("called_names skips definitions, keywords, strings and comments") {
  auto names = called_names(
      "def helper(x):\n"
      "    # concat(a)\n"
      "    s = 'average(b)'\n"
      "    if (x):\n"
      "        print(x)\n"
      "    return mk.concat([x, y]).average()\n"
      "helper(1)\n");
  CHECK(names == std::vector<std::string>{"concat", "average"});
}

TEST_CASE("ambiguous names pick deterministically") {
  auto blocks = segment_blocks("def f():\n    return concat(a, b)\n", "f.py");
  const auto& store = fixture_store();
  auto first = match_apis(blocks[0], store, 7);
  REQUIRE(first.size() == 1);
  CHECK((first[0] == "monkey.concat" || first[0] == "beatnum.concat"));
  CHECK(match_apis(blocks[0], store, 7) == first);
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) seen.insert(match_apis(blocks[0], store, seed).front());
  CHECK(seen.size() == 2);
}

TEST_CASE("retrieval example: 20-API library, ratio 8") {
  auto store = twenty_api_store();
  auto blocks = prepare_blocks("# sort values\ndef f(v):\n    return lib.fn3(v)\n", "f.py", store, 1);
  REQUIRE(blocks.size() == 1);
  // fn3 exists only in "lib"
  CHECK(blocks[0].matched_api_ids == std::vector<std::string>{"lib.fn3"});
  auto examples = build_retrieval_examples(blocks, store, 8, 1);
  REQUIRE(examples.size() == 1);
  const auto& ex = examples[0];
  CHECK(ex.description == "sort values");
  CHECK(ex.positive == "lib.fn3");
  CHECK(ex.negatives.size() == 8);
  CHECK(std::set<std::string>(ex.negatives.begin(), ex.negatives.end()).size() == 8);
  for (const auto& n : ex.negatives) {
    CHECK(n != ex.positive);
    CHECK(store.at(n).library == "lib");
  }
  CHECK_FALSE(ex.short_negatives);
  CHECK(build_retrieval_examples(blocks, store, 8, 1).front().negatives == ex.negatives);
  CHECK_THROWS_AS(build_retrieval_examples(blocks, store, 0, 1), Error);
}

TEST_CASE("negatives never include another API of the same block") {
  auto store = twenty_api_store();
  auto blocks = prepare_blocks("# two calls\ndef f(v):\n    return lib.fn1(lib.fn2(v))\n", "f.py", store, 1);
  auto examples = build_retrieval_examples(blocks, store, 19, 3);
  REQUIRE(examples.size() == 2);
  for (const auto& ex : examples) {
    CHECK(ex.negatives.size() == 18);
    CHECK(ex.short_negatives);
    CHECK(std::find(ex.negatives.begin(), ex.negatives.end(), "lib.fn1") == ex.negatives.end());
    CHECK(std::find(ex.negatives.begin(), ex.negatives.end(), "lib.fn2") == ex.negatives.end());
  }
}

TEST_CASE("cross-merge without noise keeps block order and the true APIs") {
  auto store = twenty_api_store();
  auto blocks = prepare_blocks("def a():\n    return lib.fn1()\n\n\ndef b():\n    return lib.fn2()\n", "f.py", store, 0);
  auto doc = build_pretrain_doc(blocks, store, sig(0, 0, 1, 1), 0.0, 0);
  REQUIRE(doc.segments.size() == 2);
  CHECK(doc.segments[0].api_info_lines == std::vector<std::string>{docstore::api_info_line(store.at("lib.fn1"))});
  CHECK(doc.segments[1].api_info_lines == std::vector<std::string>{docstore::api_info_line(store.at("lib.fn2"))});
  CHECK(render_pretrain_text(doc) ==
        "# Useful APIs:\n# fn1(x):Does a thing.\ndef a():\n    return lib.fn1()\n\n"
        "# Useful APIs:\n# fn2(x):Does a thing.\ndef b():\n    return lib.fn2()\n");
}

TEST_CASE("without noise the API lines are a permutation of the true lines") {
  auto store = twenty_api_store();
  auto blocks = prepare_blocks("def a():\n    return lib.fn1(lib.fn2(lib.fn3(lib.fn4())))\n", "f.py", store, 0);
  std::set<std::vector<std::string>> orders;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto doc = build_pretrain_doc(blocks, store, sig(0, 0, 1, 1), 0.0, seed);
    auto lines = doc.segments[0].api_info_lines;
    orders.insert(lines);
    std::sort(lines.begin(), lines.end());
    std::vector<std::string> expected;
    for (const auto& id : blocks[0].matched_api_ids) expected.push_back(docstore::api_info_line(store.at(id)));
    std::sort(expected.begin(), expected.end());
    CHECK(lines == expected);
  }
  CHECK(orders.size() > 1);  // shuffled
}

TEST_CASE("noise rate 1 adds one distinct unrelated API per true API") {
  auto store = twenty_api_store();
  auto blocks = prepare_blocks("def a():\n    return lib.fn1(lib.fn2())\n", "f.py", store, 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto doc = build_pretrain_doc(blocks, store, sig(0, 0, 1, 1), 1.0, seed);
    const auto& lines = doc.segments[0].api_info_lines;
    CHECK(lines.size() == 4);
    CHECK(doc.segments[0].noise_count == 2);
    CHECK(std::set<std::string>(lines.begin(), lines.end()).size() == 4);
    const auto true1 = docstore::api_info_line(store.at("lib.fn1"));
    const auto true2 = docstore::api_info_line(store.at("lib.fn2"));
    CHECK(std::count(lines.begin(), lines.end(), true1) == 1);
    CHECK(std::count(lines.begin(), lines.end(), true2) == 1);
  }
  CHECK_THROWS_AS(build_pretrain_doc(blocks, store, sig(0, 0, 1, 1), 1.5, 0), Error);
}

TEST_CASE("resampling weight hand-evaluated cases") {
  CHECK(resample_weight(sig(0, 1.0, 10, 10)) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(resample_weight(sig(1'000'000, 0.0, 1, 1'000'000)) == doctest::Approx(8.0).epsilon(1e-12));
  const double w3 = resample_weight(sig(99, 0.5, 4, 8));
  CHECK(std::abs(w3 - (1.0 + std::log(100.0) * 0.2) * 1.0 * (5.0 - std::log(2.0) * 0.2)) < 1e-12);
  CHECK(std::abs(w3 - 9.339) < 1e-3);
}

TEST_CASE("resampling weight rejects invalid signals") {
  for (auto s : {sig(0, -0.1, 1, 1), sig(0, 1.1, 1, 1), sig(0, 0.5, 0, 0), sig(0, 0.5, 3, 2), sig(0, std::nan(""), 1, 1)}) {
    try {
      resample_weight(s);
      FAIL("accepted invalid signals");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InvalidSignals);
    }
  }
}

TEST_CASE("weighted_sample follows the weights") {
  std::vector<PretrainDocument> docs(2);
  docs[0].file_id = "a.py";
  docs[0].weight = 2.5;
  docs[1].file_id = "b.py";
  docs[1].weight = 7.5;
  auto draws = weighted_sample(docs, 100'000, 5);
  const double share = static_cast<double>(std::count(draws.begin(), draws.end(), "b.py")) / 100'000.0;
  CHECK(std::abs(share - 0.75) < 0.015);
  CHECK(weighted_sample(docs, 1000, 5) == weighted_sample(docs, 1000, 5));
}

TEST_CASE("counting signals from blocks") {
  auto blocks = prepare_blocks("def a():\n    return concat(average(x), concat(y), tiny_add(1, 2), unknown(3))\n", "f.py",
                               fixture_store(), 0);
  auto s = count_api_signals(blocks, fixture_store(), 5, 0.5);
  CHECK(s.api_name_count == 3);   // concat, average, tiny_add
  CHECK(s.api_match_count == 5);  // 2 + 2 + 1
  CHECK(s.star_count == 5);
}

TEST_CASE("fixture corpus: tuples are valid and output does not depend on worker count") {
  auto signals = load_signals(testing::fixture("corpus_signals.jsonl"));
  CHECK(signals.size() == 4);
  CorpusOptions opts;
  opts.noise_rate = 0.0;
  auto one = build_corpus(testing::fixture("corpus"), signals, fixture_store(), opts);
  opts.workers = 4;
  auto four = build_corpus(testing::fixture("corpus"), signals, fixture_store(), opts);
  REQUIRE(one.examples.size() == four.examples.size());
  for (std::size_t i = 0; i < one.examples.size(); ++i) CHECK(retrieval_example_json(one.examples[i]) == retrieval_example_json(four.examples[i]));
  REQUIRE(one.documents.size() == four.documents.size());
  for (std::size_t i = 0; i < one.documents.size(); ++i) CHECK(pretrain_document_json(one.documents[i]) == pretrain_document_json(four.documents[i]));
  CHECK(one.skipped_files == std::vector<std::string>{"repo1/module_07.py"});

  for (const auto& ex : one.examples) {
    CHECK(std::find(ex.negatives.begin(), ex.negatives.end(), ex.positive) == ex.negatives.end());
    const auto& lib = fixture_store().at(ex.positive).library;
    for (const auto& n : ex.negatives) CHECK(fixture_store().at(n).library == lib);
    const auto available = fixture_store().ids_by_library(lib).size() - 1;
    CHECK(ex.negatives.size() == std::min<std::size_t>(8, available));
  }
}

TEST_CASE("fixture corpus without noise reproduces the expected cross-merged files") {
  CorpusOptions opts;
  opts.noise_rate = 0.0;
  auto out = build_corpus(testing::fixture("corpus"), {}, fixture_store(), opts);
  CHECK(out.documents.size() == 19);
  for (const auto& doc : out.documents) {
    INFO(doc.file_id);
    CHECK(render_pretrain_text(doc) == read_file(testing::fixture("golden/pretrain/" + doc.file_id)));
  }
}

TEST_CASE("signals sidecar rejects malformed lines") {
  testing::TempDir dir;
  write_file(dir.file("s.jsonl"), "{\"path\": \"a.py\", \"star_count\": 1}\n{\"star_count\": 2}\n");
  CHECK_THROWS_AS(load_signals(dir.file("s.jsonl")), Error);
}
