#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "privapi/docstore.hpp"

namespace privapi::corpus {

inline constexpr std::size_t kDefaultNegativeRatio = 8;
inline constexpr double kDefaultNoiseRate = 0.05;

enum class BlockKind { Definition, Module };

struct CodeBlock {
  std::string block_id;       // "<file_id>#<index_in_file>"
  std::string file_id;
  std::size_t index_in_file = 0;
  BlockKind kind = BlockKind::Module;
  std::size_t first_line = 0;  // 0-based, inclusive
  std::size_t last_line = 0;   // 0-based, inclusive
  std::string text;
  std::string nl_description;
  std::vector<std::string> matched_api_ids;
};

struct RetrievalExample {
  std::string block_id;
  std::string description;
  std::string positive;
  std::vector<std::string> negatives;
  bool short_negatives = false;  // library had fewer eligible APIs than the ratio
};

struct PretrainSegment {
  std::vector<std::string> api_info_lines;
  std::string block_text;
  std::size_t noise_count = 0;
};

struct PretrainDocument {
  std::string file_id;
  std::vector<PretrainSegment> segments;
  double weight = 0.0;
};

struct FileQualitySignals {
  std::uint64_t star_count = 0;       // N_star
  double unit_test_rate = 0.0;        // R_ut in [0, 1]
  std::uint64_t api_name_count = 1;   // N_api >= 1
  std::uint64_t api_match_count = 1;  // M_api >= N_api
};

/// Splits Python source into blocks at top-level definitions.
///
/// A `def`/`class` (with its decorators and the comment lines directly
/// above it) is one block; class methods stay inside their class. Runs of
/// other top-level code between definitions form module blocks. Blank lines
/// between blocks belong to no block, so every non-blank line lands in
/// exactly one block. Throws EmptyFile for whitespace-only input.
std::vector<CodeBlock> segment_blocks(std::string_view source_text, std::string_view file_id = "file");

// Docstring, else the comment lines heading the block, else "".
std::string extract_nl_description(const CodeBlock& block);

// Identifiers used as call targets (last component of dotted names), in
// source order. Keywords, strings, comments and names defined in the same
// code are skipped.
std::vector<std::string> called_names(std::string_view code);

/// Called names resolved against the store. Ambiguous names pick one record
/// with a generator keyed by (seed, file_id, block_id, name).
std::vector<std::string> match_apis(const CodeBlock& block, const docstore::DocStore& store, std::uint64_t rng_seed);

// segment_blocks + extract_nl_description + match_apis
std::vector<CodeBlock> prepare_blocks(std::string_view source_text, std::string_view file_id,
                                      const docstore::DocStore& store, std::uint64_t rng_seed);

std::vector<RetrievalExample> build_retrieval_examples(const std::vector<CodeBlock>& blocks, const docstore::DocStore& store,
                                                       std::size_t neg_ratio, std::uint64_t rng_seed);

PretrainDocument build_pretrain_doc(const std::vector<CodeBlock>& blocks, const docstore::DocStore& store,
                                    const FileQualitySignals& signals, double noise_rate, std::uint64_t rng_seed);

// The cross-merged file: each block preceded by its API comment block.
std::string render_pretrain_text(const PretrainDocument& doc);

// N_api: distinct called names known to the store; M_api: records they match.
FileQualitySignals count_api_signals(const std::vector<CodeBlock>& blocks, const docstore::DocStore& store,
                                     std::uint64_t star_count = 0, double unit_test_rate = 0.0);

void validate_signals(const FileQualitySignals& signals);
double resample_weight(const FileQualitySignals& signals);

// `count` draws with replacement, probability proportional to weight.
std::vector<std::string> weighted_sample(const std::vector<PretrainDocument>& docs, std::size_t count, std::uint64_t rng_seed);

std::string retrieval_example_json(const RetrievalExample& example);
std::string pretrain_document_json(const PretrainDocument& doc);  // weight with 6 decimals

// Sidecar JSON Lines: {"path": ..., "star_count": ..., "unit_test_rate": ...,
// optional "api_name_count", "api_match_count"}.
struct SignalsEntry {
  std::uint64_t star_count = 0;
  double unit_test_rate = 0.0;
  std::uint64_t api_name_count = 0;   // 0: derive from the file
  std::uint64_t api_match_count = 0;  // 0: derive from the file
};
std::map<std::string, SignalsEntry> load_signals(const std::string& path);

struct CorpusOptions {
  std::size_t neg_ratio = kDefaultNegativeRatio;
  double noise_rate = kDefaultNoiseRate;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct CorpusOutputs {
  std::vector<RetrievalExample> examples;
  std::vector<PretrainDocument> documents;
  std::vector<std::string> skipped_files;  // empty files or files without API calls
};

/// Walks every .py file under corpus_dir (sorted by relative path, which is
/// also the file_id) and builds both corpora. Output does not depend on
/// `workers`.
CorpusOutputs build_corpus(const std::string& corpus_dir, const std::map<std::string, SignalsEntry>& signals,
                           const docstore::DocStore& store, const CorpusOptions& options);

}  // namespace privapi::corpus
