#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "privapi/apiretriever.hpp"
#include "privapi/error.hpp"
#include "privapi/simd/dot.hpp"
#include "support.hpp"

using namespace privapi;
using namespace privapi::retriever;
using docstore::ApiRecord;
using docstore::DocStore;

namespace {

// 200 records whose names and descriptions use disjoint vocabularies
DocStore synthetic_store(std::size_t count = 200) {
  std::vector<ApiRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    ApiRecord r;
    r.library = "lib" + std::to_string(i % 7);
    r.name = "op" + std::to_string(i);
    r.api_id = r.library + "." + r.name;
    r.signature = "x";
    r.description_full = "word" + std::to_string(i) + "a shared word" + std::to_string(i) + "b. Extra.";
    r.description_first = docstore::first_sentence(r.description_full);
    records.push_back(r);
  }
  return DocStore(records);
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

std::vector<ScoredApi> brute_force(const ApiIndex& index, const std::vector<double>& q, std::size_t k) {
  std::vector<ScoredApi> all;
  for (std::size_t i = 0; i < index.size(); ++i) {
    all.push_back({index.ids()[i], simd::dot(simd::Isa::Scalar, q, index.row(i))});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.api_id < b.api_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace

TEST_CASE("tokenizer and baseline embedding") {
  CHECK(tokenize("Sort_values, by 2 Keys!") == std::vector<std::string>{"sort", "values", "by", "2", "keys"});
  BaselineEmbedder e(64);
  CHECK(e.fingerprint() == "baseline-hash-v1;z=64");
  auto v = e.embed("merge two frames merge");
  double norm = 0;
  for (double x : v) norm += x * x;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.embed("merge two frames merge") == v);
  auto zero = e.embed("  ,, ");
  CHECK(std::all_of(zero.begin(), zero.end(), [](double x) { return x == 0.0; }));
  CHECK_THROWS_AS(BaselineEmbedder(0), Error);
}

TEST_CASE("self retrieval: every record ranks itself first") {
  auto store = synthetic_store();
  BaselineEmbedder e;
  auto index = build_index(store, e);
  REQUIRE(index.size() == 200);
  for (const auto& r : store.records()) {
    auto ranking = query(index, default_index_text(r), 1, e);
    REQUIRE(ranking.ranked.size() == 1);
    CHECK(ranking.ranked[0].api_id == r.api_id);
  }
}

TEST_CASE("ranking equals a brute-force sort over reference scores") {
  auto store = synthetic_store();
  BaselineEmbedder e;
  auto index = build_index(store, e);
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    std::string q;
    for (int w = 0; w < 4; ++w) q += "word" + std::to_string(gen() % 200) + (gen() % 2 ? "a " : "b ") + "shared ";
    const auto qv = e.embed(q);
    for (std::size_t k : {1u, 5u, 17u, 200u, 500u}) {
      auto got = query_vector(index, qv, k);
      CHECK(got.ranked == brute_force(index, qv, k));
    }
  }
}

TEST_CASE("ranking is invariant to entry order and positive power-of-two scaling") {
  auto store = synthetic_store(60);
  BaselineEmbedder e(32);  // small z forces hash collisions and ties
  auto index = build_index(store, e);
  std::vector<IndexEntry> entries, scaled;
  for (std::size_t i = 0; i < index.size(); ++i) {
    entries.push_back({index.ids()[i], {index.row(i).begin(), index.row(i).end()}});
    IndexEntry s = entries.back();
    for (auto& x : s.vector) x *= 4.0f;
    scaled.push_back(std::move(s));
  }
  std::mt19937_64 gen(5);
  std::shuffle(entries.begin(), entries.end(), gen);
  ApiIndex shuffled(index.fingerprint(), index.dimension(), entries);
  ApiIndex bigger(index.fingerprint(), index.dimension(), scaled);
  for (const char* q : {"word3a shared", "shared", "op7 word9b", "nothing matches zzz"}) {
    auto base = query(index, q, 60, e).ids();
    CHECK(query(shuffled, q, 60, e).ids() == base);
    CHECK(query(bigger, q, 60, e).ids() == base);
    auto ranked = query(index, q, 60, e).ranked;
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].score >= ranked[i].score);
  }
}

TEST_CASE("recall@k is nondecreasing in k") {
  auto store = synthetic_store();
  BaselineEmbedder e;
  auto index = build_index(store, e);
  std::mt19937_64 gen(8);
  for (int t = 0; t < 50; ++t) {
    const auto& target = store.records()[gen() % store.size()];
    std::set<std::string> golden{target.api_id, store.records()[gen() % store.size()].api_id};
    auto ranking = query(index, "word" + target.name.substr(2) + "a shared", 200, e);
    double prev = 0.0;
    for (std::size_t k = 1; k <= 200; ++k) {
      const double r = recall_at_k(ranking, golden, k);
      CHECK(r >= prev);
      prev = r;
    }
    CHECK(prev == 1.0);
  }
}

TEST_CASE("recall and selection accuracy definitions") {
  Ranking r{"p", {{"a", 0.9}, {"x", 0.8}, {"y", 0.7}, {"z", 0.6}, {"w", 0.5}, {"b", 0.4}}};
  CHECK(recall_at_k(r, {"a", "b"}, 5) == 0.5);
  CHECK(recall_at_k(r, {"a", "b"}, 6) == 1.0);
  CHECK(code_of([&] { recall_at_k(r, {}, 5); }) == Errc::EmptyGolden);
  auto acc = selection_accuracy({"a"}, {"a", "b"});
  CHECK(acc.precision == 1.0);
  CHECK(acc.recall == 0.5);
  auto none = selection_accuracy({}, {"a"});
  CHECK(none.precision == 1.0);  // nothing selected, nothing wrong
  CHECK(none.recall == 0.0);
  auto miss = selection_accuracy({"c"}, {"a"});
  CHECK(miss.precision == 0.0);
  CHECK(miss.recall == 0.0);
  CHECK(code_of([] { selection_accuracy({"a"}, {}); }) == Errc::EmptyGolden);
}

TEST_CASE("majority voting") {
  CHECK(majority_threshold(3) == 2);
  CHECK(majority_threshold(4) == 3);
  std::vector<std::set<std::string>> votes{{"a", "b"}, {"a"}, {"c", "b"}};
  CHECK(aggregate_votes(votes) == std::set<std::string>{"a", "b"});
  std::vector<std::set<std::string>> one_vote{{"a"}, {"b"}, {"c"}};
  CHECK(aggregate_votes(one_vote).empty());
  CHECK(aggregate_votes(one_vote, 1) == std::set<std::string>{"a", "b", "c"});
  std::vector<std::set<std::string>> perm = votes;
  do {
    CHECK(aggregate_votes(perm) == aggregate_votes(votes));
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(code_of([] { aggregate_votes(std::span<const std::set<std::string>>{}); }) == Errc::InvalidArgs);
  std::vector<std::set<std::string>> same{{"a", "b"}, {"a", "b"}, {"a", "b"}};
  CHECK(aggregate_votes(same) == same[0]);
}

TEST_CASE("index file round trip and validation") {
  auto store = synthetic_store(20);
  BaselineEmbedder e(16);
  auto index = build_index(store, e);
  testing::TempDir dir;
  index.save(dir.file("i.bin"));
  auto loaded = ApiIndex::load(dir.file("i.bin"));
  CHECK(loaded == index);

  auto bytes = read_file(dir.file("i.bin"));
  write_file(dir.file("trunc.bin"), bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(ApiIndex::load(dir.file("trunc.bin")), Error);
  write_file(dir.file("magic.bin"), "XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(ApiIndex::load(dir.file("magic.bin")), Error);
  CHECK(code_of([&] { ApiIndex::load(dir.file("missing.bin")); }) == Errc::Io);

  CHECK(code_of([&] { query(index, "x", 3, BaselineEmbedder(32)); }) == Errc::FingerprintMismatch);
  CHECK(code_of([&] { query(index, "x", 0, e); }) == Errc::InvalidArgs);
  ApiIndex empty(e.fingerprint(), 16, {});
  CHECK(code_of([&] { query(empty, "x", 3, e); }) == Errc::EmptyIndex);
  CHECK(code_of([&] { build_index(DocStore{}, e); }) == Errc::EmptyStore);
  CHECK_THROWS_AS(ApiIndex("f", 2, {{"a", {1.0f}}}), Error);
  CHECK_THROWS_AS(ApiIndex("f", 1, {{"a", {1.0f}}, {"a", {2.0f}}}), Error);
}

TEST_CASE("HTTP embedder talks to an embedding service") {
  httplib::Server server;
  std::atomic<int> calls{0};
  server.Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
    calls++;
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : body.at("texts")) {
      const double len = static_cast<double>(t.get<std::string>().size());
      vectors.push_back({len, 1.0, 0.0});
    }
    res.set_content(nlohmann::json{{"vectors", vectors}, {"dimension", 3}}.dump(), "application/json");
  });
  server.Post("/bad/embed", [](const httplib::Request&, httplib::Response& res) { res.set_content("{\"vectors\": [[1, 2]]}", "application/json"); });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  HttpEmbedder good(base + "/v1", 3);
  CHECK(good.fingerprint().find("z=3") != std::string::npos);
  auto v = good.embed("abcd");
  CHECK(v == std::vector<double>{4.0, 1.0, 0.0});
  std::vector<std::string> texts{"a", "bb"};
  auto batch = good.embed_batch(texts);
  REQUIRE(batch.size() == 2);
  CHECK(batch[1][0] == 2.0);

  HttpEmbedder wrong_dim(base + "/bad", 3);
  CHECK(code_of([&] { wrong_dim.embed("x"); }) == Errc::EmbeddingProvider);

  server.stop();
  t.join();
  HttpEmbedder down(base + "/v1", 3, std::chrono::seconds(2));
  CHECK(code_of([&] { down.embed("x"); }) == Errc::EmbeddingProvider);
  CHECK_THROWS_AS(HttpEmbedder("ftp://x", 3), Error);
}
