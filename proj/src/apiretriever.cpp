#include "privapi/apiretriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "httplib.h"
#include "json.hpp"

#include "privapi/error.hpp"
#include "privapi/http_endpoint.hpp"
#include "privapi/simd/dot.hpp"
#include "privapi/util.hpp"

namespace privapi::retriever {

namespace {

constexpr char kIndexMagic[5] = {'A', 'P', 'I', 'X', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  std::uint64_t uint(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  float f32() {
    auto bits = static_cast<std::uint32_t>(uint(4));
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  std::string bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(Errc::Io, "truncated index file");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

bool ranks_before(const ScoredApi& a, const ScoredApi& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.api_id < b.api_id;
}

}  // namespace

std::vector<std::vector<double>> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> baseline_embed(std::string_view text, std::size_t dimension) {
  if (dimension == 0) throw Error(Errc::InvalidArgs, "embedding dimension must be >= 1");
  std::map<std::string, std::size_t> tf;
  for (auto& tok : tokenize(text)) ++tf[tok];

  std::vector<double> v(dimension, 0.0);
  for (const auto& [tok, count] : tf) {
    v[fnv1a64(tok) % dimension] += 1.0 + std::log(static_cast<double>(count));
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
  }
  return v;
}

BaselineEmbedder::BaselineEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(Errc::InvalidArgs, "embedding dimension must be >= 1");
}

std::string BaselineEmbedder::fingerprint() const { return "baseline-hash-v1;z=" + std::to_string(dimension_); }

std::vector<double> BaselineEmbedder::embed(std::string_view text) const { return baseline_embed(text, dimension_); }

HttpEmbedder::HttpEmbedder(std::string endpoint, std::size_t dimension, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), dimension_(dimension), timeout_(timeout) {
  if (dimension_ == 0) throw Error(Errc::InvalidArgs, "embedding dimension must be >= 1");
  parse_http_endpoint(endpoint_);
}

std::string HttpEmbedder::fingerprint() const { return "http:" + endpoint_ + ";z=" + std::to_string(dimension_); }

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
  std::vector<std::string> one{std::string(text)};
  return embed_batch(one).front();
}

std::vector<std::vector<double>> HttpEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  const auto target = parse_http_endpoint(endpoint_);
  httplib::Client client(target.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  nlohmann::json body;
  body["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  auto res = client.Post(target.path_prefix + "/embed", body.dump(), "application/json");
  if (!res) throw Error(Errc::EmbeddingProvider, "embedding provider unreachable at " + endpoint_);
  if (res->status != 200) throw Error(Errc::EmbeddingProvider, "embedding provider returned HTTP " + std::to_string(res->status));

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::EmbeddingProvider, "embedding provider returned invalid JSON");
  }
  if (!reply.is_object() || !reply.contains("dimension") || !reply["dimension"].is_number_integer() ||
      !reply.contains("vectors") || !reply["vectors"].is_array()) {
    throw Error(Errc::EmbeddingProvider, "embedding response lacks \"vectors\" or \"dimension\"");
  }
  if (reply["dimension"].get<long long>() != static_cast<long long>(dimension_)) {
    throw Error(Errc::EmbeddingProvider, "embedding dimension " + reply["dimension"].dump() + " != expected " + std::to_string(dimension_));
  }
  const auto& vectors = reply["vectors"];
  if (vectors.size() != texts.size()) throw Error(Errc::EmbeddingProvider, "embedding count does not match request");

  std::vector<std::vector<double>> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array() || v.size() != dimension_) throw Error(Errc::EmbeddingProvider, "embedding vector has wrong length");
    std::vector<double> row;
    row.reserve(dimension_);
    for (const auto& x : v) {
      if (!x.is_number()) throw Error(Errc::EmbeddingProvider, "embedding vector has a non-numeric value");
      row.push_back(x.get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

ApiIndex::ApiIndex(std::string fingerprint, std::size_t dimension, std::vector<IndexEntry> entries)
    : fingerprint_(std::move(fingerprint)), dimension_(dimension) {
  if (dimension_ == 0) throw Error(Errc::InvalidArgs, "index dimension must be >= 1");
  std::set<std::string> seen;
  ids_.reserve(entries.size());
  rows_.reserve(entries.size() * dimension_);
  for (auto& e : entries) {
    if (e.vector.size() != dimension_) {
      throw Error(Errc::InvalidArgs, "vector for " + e.api_id + " has dimension " + std::to_string(e.vector.size()));
    }
    if (!seen.insert(e.api_id).second) throw Error(Errc::DuplicateApiId, e.api_id);
    ids_.push_back(std::move(e.api_id));
    rows_.insert(rows_.end(), e.vector.begin(), e.vector.end());
  }
}

void ApiIndex::save(const std::string& path) const {
  std::string out(kIndexMagic, sizeof kIndexMagic);
  put_u32(out, static_cast<std::uint32_t>(dimension_));
  put_u64(out, ids_.size());
  put_u32(out, static_cast<std::uint32_t>(fingerprint_.size()));
  out += fingerprint_;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    put_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
    out += ids_[i];
    for (float f : row(i)) put_f32(out, f);
  }
  write_file(path, out);
}

ApiIndex ApiIndex::load(const std::string& path) {
  Reader in(read_file(path));
  if (in.bytes(sizeof kIndexMagic) != std::string(kIndexMagic, sizeof kIndexMagic)) {
    throw Error(Errc::Io, path + " is not an APIX1 index");
  }
  const auto dimension = static_cast<std::size_t>(in.uint(4));
  const auto count = in.uint(8);
  auto fingerprint = in.bytes(static_cast<std::size_t>(in.uint(4)));
  std::vector<IndexEntry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    IndexEntry e;
    e.api_id = in.bytes(static_cast<std::size_t>(in.uint(4)));
    e.vector.resize(dimension);
    for (auto& f : e.vector) f = in.f32();
    entries.push_back(std::move(e));
  }
  if (!in.done()) throw Error(Errc::Io, "trailing bytes in index file " + path);
  return ApiIndex(std::move(fingerprint), dimension, std::move(entries));
}

std::vector<std::string> Ranking::ids() const {
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.api_id);
  return out;
}

std::string default_index_text(const docstore::ApiRecord& record) {
  return record.name + " " + record.description_first;
}

ApiIndex build_index(const docstore::DocStore& store, const Embedder& embedder, const TextFn& text_fn) {
  if (store.empty()) throw Error(Errc::EmptyStore, "cannot index an empty doc store");
  std::vector<std::string> texts;
  texts.reserve(store.size());
  for (const auto& r : store.records()) texts.push_back(text_fn(r));
  auto vectors = embedder.embed_batch(texts);

  std::vector<IndexEntry> entries;
  entries.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (vectors[i].size() != embedder.dimension()) throw Error(Errc::EmbeddingProvider, "embedder returned wrong dimension");
    entries.push_back({store.records()[i].api_id, std::vector<float>(vectors[i].begin(), vectors[i].end())});
  }
  return ApiIndex(embedder.fingerprint(), embedder.dimension(), std::move(entries));
}

Ranking query_vector(const ApiIndex& index, std::span<const double> query, std::size_t k, std::string problem_id) {
  if (index.empty()) throw Error(Errc::EmptyIndex, "query against an empty index");
  if (k == 0) throw Error(Errc::InvalidArgs, "k must be >= 1");
  if (query.size() != index.dimension()) throw Error(Errc::InvalidArgs, "query dimension does not match index");

  std::vector<double> scores(index.size());
  simd::score_rows(query, index.rows(), scores);

  std::vector<ScoredApi> all;
  all.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) all.push_back({index.ids()[i], scores[i]});
  const std::size_t top = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top), all.end(), ranks_before);
  all.resize(top);
  return Ranking{std::move(problem_id), std::move(all)};
}

Ranking query(const ApiIndex& index, std::string_view description, std::size_t k, const Embedder& embedder,
              std::string problem_id) {
  if (embedder.fingerprint() != index.fingerprint()) {
    throw Error(Errc::FingerprintMismatch, "index built by \"" + index.fingerprint() + "\", queried with \"" + embedder.fingerprint() + "\"");
  }
  if (index.empty()) throw Error(Errc::EmptyIndex, "query against an empty index");
  const auto v = embedder.embed(description);
  return query_vector(index, v, k, std::move(problem_id));
}

double recall_at_k(const Ranking& ranking, const std::set<std::string>& golden, std::size_t k) {
  if (golden.empty()) throw Error(Errc::EmptyGolden, "recall needs at least one golden API");
  std::size_t hits = 0;
  const std::size_t top = std::min(k, ranking.ranked.size());
  for (std::size_t i = 0; i < top; ++i) hits += golden.count(ranking.ranked[i].api_id);
  return static_cast<double>(hits) / static_cast<double>(golden.size());
}

SelectionAccuracy selection_accuracy(const std::set<std::string>& selected, const std::set<std::string>& golden) {
  if (golden.empty()) throw Error(Errc::EmptyGolden, "accuracy needs at least one golden API");
  std::size_t hits = 0;
  for (const auto& id : selected) hits += golden.count(id);
  SelectionAccuracy acc;
  acc.precision = selected.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(selected.size());
  acc.recall = static_cast<double>(hits) / static_cast<double>(golden.size());
  return acc;
}

std::size_t majority_threshold(std::size_t voters) noexcept { return voters / 2 + 1; }

std::set<std::string> aggregate_votes(std::span<const std::set<std::string>> selections, std::optional<std::size_t> threshold) {
  if (selections.empty()) throw Error(Errc::InvalidArgs, "voting needs at least one selection");
  const std::size_t need = threshold.value_or(majority_threshold(selections.size()));
  std::map<std::string, std::size_t> counts;
  for (const auto& s : selections) {
    for (const auto& id : s) ++counts[id];
  }
  std::set<std::string> out;
  for (const auto& [id, n] : counts) {
    if (n >= need) out.insert(id);
  }
  return out;
}

}  // namespace privapi::retriever
