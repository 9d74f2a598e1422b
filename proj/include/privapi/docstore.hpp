#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace privapi::docstore {

struct ApiParameter {
  std::string name;
  std::string description;
  bool operator==(const ApiParameter&) const = default;
};

struct ApiRecord {
  std::string api_id;
  std::string library;
  std::string name;
  std::string qualified_name;
  std::string signature;  // parameter list without the enclosing parentheses
  std::string description_full;
  std::string description_first;
  std::vector<ApiParameter> parameters;
  std::vector<std::string> examples;

  bool operator==(const ApiRecord&) const = default;
};

/// Immutable collection of API records with name and library indexes.
///
/// A name may resolve to several records (e.g. `concat` in two libraries);
/// the store keeps all of them and leaves disambiguation to callers.
class DocStore {
 public:
  DocStore() = default;
  /// Throws DuplicateApiId or MalformedRecord on invalid records.
  explicit DocStore(std::vector<ApiRecord> records);

  const std::vector<ApiRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const ApiRecord* find(std::string_view api_id) const;
  const ApiRecord& at(std::string_view api_id) const;  // throws UnknownApiId

  // api_ids sorted ascending; empty when nothing matches
  const std::vector<std::string>& ids_by_name(std::string_view name) const;
  const std::vector<std::string>& ids_by_library(std::string_view library) const;
  const std::map<std::string, std::vector<std::string>, std::less<>>& by_library() const noexcept { return by_library_; }
  const std::map<std::string, std::vector<std::string>, std::less<>>& by_name() const noexcept { return by_name_; }

 private:
  std::vector<ApiRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_name_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_library_;
};

// Text up to and including the first '.', '!' or '?' that is followed by
// whitespace or end of text, with whitespace runs collapsed. Without a
// terminator the whole (normalized) text is returned.
std::string first_sentence(std::string_view text);

// name(signature):description_first
std::string api_info_line(const ApiRecord& record);

/// Reads a doc dump (JSON Lines). Blank lines are skipped; line numbers in
/// MalformedRecord errors are 1-based physical line numbers.
DocStore ingest_doc_dump(std::istream& source);
DocStore load_doc_dump(const std::string& path);

// Canonical single-line JSON for a record (fixed key order).
std::string serialize_record(const ApiRecord& record);
std::string serialize_store(const DocStore& store);

}  // namespace privapi::docstore
