#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privapi/docstore.hpp"

namespace privapi::retriever {

inline constexpr std::size_t kDefaultDimension = 768;

/// Maps text to a fixed-length vector. Implementations must be
/// deterministic: the same text always yields the same vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  // Identity of the embedding function; an index only answers queries from
  // an embedder with the same fingerprint.
  virtual std::string fingerprint() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const;
};

// Hashed bag of words: lowercase alphanumeric tokens, one bucket per token
// (FNV-1a mod z), weight 1 + ln(tf), L2-normalized. Empty text embeds to
// the zero vector.
std::vector<double> baseline_embed(std::string_view text, std::size_t dimension);
std::vector<std::string> tokenize(std::string_view text);

class BaselineEmbedder final : public Embedder {
 public:
  explicit BaselineEmbedder(std::size_t dimension = kDefaultDimension);
  std::size_t dimension() const override { return dimension_; }
  std::string fingerprint() const override;
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

/// Client for an external embedding service:
/// POST {endpoint}/embed {"texts": [...]} -> {"vectors": [[...]], "dimension": z}.
/// Any dimension or shape disagreement fails with EmbeddingProvider.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, std::size_t dimension, std::chrono::seconds timeout = std::chrono::seconds(60));
  std::size_t dimension() const override { return dimension_; }
  std::string fingerprint() const override;
  std::vector<double> embed(std::string_view text) const override;
  std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::string endpoint_;
  std::size_t dimension_;
  std::chrono::seconds timeout_;
};

struct IndexEntry {
  std::string api_id;
  std::vector<float> vector;
};

/// Exact inner-product index. Vectors are stored as float32 rows in one
/// contiguous buffer; scores are accumulated in double.
class ApiIndex {
 public:
  ApiIndex(std::string fingerprint, std::size_t dimension, std::vector<IndexEntry> entries);

  const std::string& fingerprint() const noexcept { return fingerprint_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t i) const { return {rows_.data() + i * dimension_, dimension_}; }
  std::span<const float> rows() const noexcept { return rows_; }

  void save(const std::string& path) const;
  static ApiIndex load(const std::string& path);

  bool operator==(const ApiIndex&) const = default;

 private:
  std::string fingerprint_;
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::vector<float> rows_;
};

struct ScoredApi {
  std::string api_id;
  double score = 0.0;
  bool operator==(const ScoredApi&) const = default;
};

struct Ranking {
  std::string problem_id;
  std::vector<ScoredApi> ranked;  // score descending, ties by ascending api_id

  std::vector<std::string> ids() const;
};

using TextFn = std::function<std::string(const docstore::ApiRecord&)>;
// name + " " + description_first
std::string default_index_text(const docstore::ApiRecord& record);

ApiIndex build_index(const docstore::DocStore& store, const Embedder& embedder, const TextFn& text_fn = default_index_text);

Ranking query(const ApiIndex& index, std::string_view description, std::size_t k, const Embedder& embedder,
              std::string problem_id = {});
// Ranks a precomputed query vector; no fingerprint check.
Ranking query_vector(const ApiIndex& index, std::span<const double> query, std::size_t k, std::string problem_id = {});

double recall_at_k(const Ranking& ranking, const std::set<std::string>& golden, std::size_t k);

struct SelectionAccuracy {
  double precision = 0.0;
  double recall = 0.0;
};
SelectionAccuracy selection_accuracy(const std::set<std::string>& selected, const std::set<std::string>& golden);

// Strict majority (floor(m / 2) + 1 of m voters) unless a threshold is given.
std::set<std::string> aggregate_votes(std::span<const std::set<std::string>> selections,
                                      std::optional<std::size_t> threshold = std::nullopt);
std::size_t majority_threshold(std::size_t voters) noexcept;

}  // namespace privapi::retriever
