#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "privapi/evalharness.hpp"

namespace privapi::bench {

/// Public -> private identifier renames for one library pair.
class KeywordMap {
 public:
  // Rejects duplicate public tokens, empty or non-identifier tokens, and any
  // private token that is also a public token (conversion would not be
  // idempotent). Throws InvalidKeywordMap.
  KeywordMap(std::string public_library, std::string private_library,
             std::vector<std::pair<std::string, std::string>> entries);

  const std::string& public_library() const noexcept { return public_library_; }
  const std::string& private_library() const noexcept { return private_library_; }
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
  const std::string* lookup(std::string_view public_token) const;
  // entry indices, longest public token first
  const std::vector<std::size_t>& by_length() const noexcept { return by_length_; }

 private:
  std::string public_library_;
  std::string private_library_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::string, std::less<>> index_;
  std::vector<std::size_t> by_length_;  // entry indices, longest public token first
};

/// TSV: `public<TAB>private` per line, '#' comments. A comment of the form
/// `# library: pandas -> monkey` names the pair; otherwise the file stem
/// (`pandas_monkey.tsv`) is split on '_'.
KeywordMap load_keyword_map(const std::string& path);
KeywordMap parse_keyword_map(std::string_view tsv, std::string public_library = {}, std::string private_library = {});

struct ConversionReport {
  std::map<std::string, std::size_t> replaced;       // public token -> occurrences
  std::vector<std::string> untouched_known_tokens;   // map keys absent from the text
};

/// Replaces whole identifiers only (neighbours outside [A-Za-z0-9_]),
/// longest public token first at each position, in one left-to-right pass.
/// String literals and comments are converted too.
std::pair<std::string, ConversionReport> convert_text(std::string_view text, const KeywordMap& map);

/// Converts context, solution and tests; ids get "-<private library>";
/// golden ids go through `id_translation` (MissingIdTranslation if absent).
std::vector<eval::Problem> convert_benchmark(const std::vector<eval::Problem>& problems, const KeywordMap& map,
                                             const std::map<std::string, std::string>& id_translation);

// Two-column TSV: public api_id, private api_id.
std::map<std::string, std::string> load_id_translation(const std::string& path);

struct BucketCheck {
  std::string bucket;   // "1", "2", "3+"
  std::size_t actual = 0;
  double expected = 0.0;
  double delta = 0.0;   // actual - expected
  bool ok = false;      // |delta| <= 1
};

struct ValidationResult {
  bool count_ok = false;
  bool ratio_ok = false;
  std::size_t count = 0;
  std::size_t expected_count = 0;
  std::array<BucketCheck, 3> buckets{};
  bool ok() const { return count_ok && ratio_ok; }
  std::vector<std::string> failures() const;
};

/// Size check plus the 1-API : 2-API : 3+-API split, each bucket within one
/// problem of expected_count * r_i / (r1 + r2 + r3).
ValidationResult validate_manifest(const std::vector<eval::Problem>& problems, std::size_t expected_count,
                                   std::array<std::size_t, 3> ratio);

}  // namespace privapi::bench
