#include "privapi/docstore.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"

#include "privapi/error.hpp"
#include "privapi/util.hpp"

namespace privapi::docstore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string> kNoIds;

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

std::string required_string(const json& obj, const char* key, std::size_t line_no, bool non_empty) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(Errc::MalformedRecord, std::string("missing or non-string \"") + key + "\" on line " + std::to_string(line_no), line_no);
  }
  auto value = it->get<std::string>();
  if (non_empty && value.empty()) {
    throw Error(Errc::MalformedRecord, std::string("empty \"") + key + "\" on line " + std::to_string(line_no), line_no);
  }
  return value;
}

std::string optional_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(Errc::MalformedRecord, std::string("non-string \"") + key + "\" on line " + std::to_string(line_no), line_no);
  }
  return it->get<std::string>();
}

ApiRecord parse_record(const std::string& text, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedRecord, "invalid JSON on line " + std::to_string(line_no) + ": " + e.what(), line_no);
  }
  if (!obj.is_object()) throw Error(Errc::MalformedRecord, "line " + std::to_string(line_no) + " is not an object", line_no);

  ApiRecord r;
  r.api_id = required_string(obj, "api_id", line_no, true);
  r.library = required_string(obj, "library", line_no, true);
  r.name = required_string(obj, "name", line_no, true);
  r.qualified_name = optional_string(obj, "qualified_name", line_no);
  r.signature = optional_string(obj, "signature", line_no);
  r.description_full = optional_string(obj, "description", line_no);
  r.description_first = first_sentence(r.description_full);

  if (auto it = obj.find("parameters"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(Errc::MalformedRecord, "\"parameters\" must be an array on line " + std::to_string(line_no), line_no);
    for (const auto& p : *it) {
      if (!p.is_object()) throw Error(Errc::MalformedRecord, "parameter entry must be an object on line " + std::to_string(line_no), line_no);
      r.parameters.push_back({required_string(p, "name", line_no, false), optional_string(p, "description", line_no)});
    }
  }
  if (auto it = obj.find("examples"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(Errc::MalformedRecord, "\"examples\" must be an array on line " + std::to_string(line_no), line_no);
    for (const auto& e : *it) {
      if (!e.is_string()) throw Error(Errc::MalformedRecord, "example must be a string on line " + std::to_string(line_no), line_no);
      r.examples.push_back(e.get<std::string>());
    }
  }
  return r;
}

}  // namespace

DocStore::DocStore(std::vector<ApiRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.api_id.empty() || r.name.empty() || r.library.empty()) {
      throw Error(Errc::MalformedRecord, "record " + std::to_string(i + 1) + " lacks api_id, name or library", i + 1);
    }
    if (!by_id_.emplace(r.api_id, i).second) throw Error(Errc::DuplicateApiId, r.api_id, i + 1);
    by_name_[r.name].push_back(r.api_id);
    by_library_[r.library].push_back(r.api_id);
  }
  for (auto& [_, ids] : by_name_) std::sort(ids.begin(), ids.end());
  for (auto& [_, ids] : by_library_) std::sort(ids.begin(), ids.end());
}

const ApiRecord* DocStore::find(std::string_view api_id) const {
  auto it = by_id_.find(api_id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const ApiRecord& DocStore::at(std::string_view api_id) const {
  if (const auto* r = find(api_id)) return *r;
  throw Error(Errc::UnknownApiId, std::string(api_id));
}

const std::vector<std::string>& DocStore::ids_by_name(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? kNoIds : it->second;
}

const std::vector<std::string>& DocStore::ids_by_library(std::string_view library) const {
  auto it = by_library_.find(library);
  return it == by_library_.end() ? kNoIds : it->second;
}

std::string first_sentence(std::string_view text) {
  const std::string normalized = normalize_whitespace(text);
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (is_terminator(normalized[i]) && (i + 1 == normalized.size() || normalized[i + 1] == ' ')) {
      return normalized.substr(0, i + 1);
    }
  }
  return normalized;
}

std::string api_info_line(const ApiRecord& record) {
  std::string line;
  line.reserve(record.name.size() + record.signature.size() + record.description_first.size() + 3);
  line += record.name;
  line += '(';
  line += record.signature;
  line += "):";
  line += record.description_first;
  return line;
}

DocStore ingest_doc_dump(std::istream& source) {
  std::vector<ApiRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto record = parse_record(line, line_no);
    if (!seen.insert(record.api_id).second) {
      throw Error(Errc::DuplicateApiId, record.api_id + " repeated on line " + std::to_string(line_no), line_no);
    }
    records.push_back(std::move(record));
  }
  return DocStore(std::move(records));
}

DocStore load_doc_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open doc dump " + path);
  return ingest_doc_dump(in);
}

std::string serialize_record(const ApiRecord& r) {
  ordered_json obj;
  obj["api_id"] = r.api_id;
  obj["library"] = r.library;
  obj["name"] = r.name;
  obj["qualified_name"] = r.qualified_name;
  obj["signature"] = r.signature;
  obj["description"] = r.description_full;
  obj["parameters"] = ordered_json::array();
  for (const auto& p : r.parameters) {
    ordered_json param;
    param["name"] = p.name;
    param["description"] = p.description;
    obj["parameters"].push_back(std::move(param));
  }
  obj["examples"] = r.examples;
  return obj.dump();
}

std::string serialize_store(const DocStore& store) {
  std::string out;
  for (const auto& r : store.records()) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

}  // namespace privapi::docstore
