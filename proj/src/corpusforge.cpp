#include "privapi/corpusforge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>

#include "json.hpp"

#include "privapi/error.hpp"
#include "privapi/promptkit.hpp"
#include "privapi/util.hpp"

namespace privapi::corpus {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string_view> kPythonKeywords = {
    "False", "None",   "True",  "and",    "as",       "assert", "async", "await",  "break",
    "class", "continue", "def", "del",    "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",    "import", "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise", "return", "try",      "while",  "with",   "yield",  "print"};

// Tracks string/bracket state across lines of Python source.
class PyScanner {
 public:
  bool in_continuation() const { return triple_ != 0 || depth_ > 0; }

  // Scans one line; if `masked` is non-null, appends the line with string
  // contents and comments replaced by spaces.
  void scan(std::string_view line, std::string* masked) {
    std::size_t i = 0;
    auto emit = [&](char c, bool keep) {
      if (masked) masked->push_back(keep || c == '\n' ? c : ' ');
    };
    while (i < line.size()) {
      const char c = line[i];
      if (triple_ != 0) {
        if (c == '\\' && i + 1 < line.size()) {
          emit(c, false);
          emit(line[i + 1], false);
          i += 2;
          continue;
        }
        if (c == triple_ && line.substr(i, 3) == std::string(3, triple_)) {
          for (int k = 0; k < 3; ++k) emit(c, true);
          triple_ = 0;
          i += 3;
          continue;
        }
        emit(c, false);
        ++i;
        continue;
      }
      if (c == '#') {
        while (i < line.size()) emit(line[i++], false);
        break;
      }
      if (c == '"' || c == '\'') {
        if (line.substr(i, 3) == std::string(3, c)) {
          for (int k = 0; k < 3; ++k) emit(c, true);
          triple_ = c;
          i += 3;
          continue;
        }
        emit(c, true);
        ++i;
        while (i < line.size() && line[i] != c && line[i] != '\n') {
          if (line[i] == '\\' && i + 1 < line.size()) {
            emit(line[i], false);
            ++i;
          }
          emit(line[i], false);
          ++i;
        }
        if (i < line.size() && line[i] == c) {
          emit(c, true);
          ++i;
        }
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth_;
      if ((c == ')' || c == ']' || c == '}') && depth_ > 0) --depth_;
      emit(c, true);
      ++i;
    }
  }

 private:
  char triple_ = 0;
  int depth_ = 0;
};

enum class LineKind { Blank, Continued, Top, TopComment, DefStart, Decorator };

bool starts_with_word(std::string_view s, std::string_view word) {
  return s.size() > word.size() && s.substr(0, word.size()) == word &&
         (s[word.size()] == ' ' || s[word.size()] == '\t');
}

bool is_def_line(std::string_view s) {
  return starts_with_word(s, "def") || starts_with_word(s, "class") ||
         (starts_with_word(s, "async") && starts_with_word(trim(s.substr(5)), "def"));
}

std::vector<LineKind> classify(const std::vector<std::string>& lines) {
  std::vector<LineKind> kinds;
  kinds.reserve(lines.size());
  PyScanner scanner;
  for (const auto& line : lines) {
    const bool cont = scanner.in_continuation();
    scanner.scan(line, nullptr);
    if (cont) {
      kinds.push_back(LineKind::Continued);
    } else if (trim(line).empty()) {
      kinds.push_back(LineKind::Blank);
    } else if (line[0] == ' ' || line[0] == '\t') {
      kinds.push_back(LineKind::Continued);
    } else if (line[0] == '#') {
      kinds.push_back(LineKind::TopComment);
    } else if (line[0] == '@') {
      kinds.push_back(LineKind::Decorator);
    } else if (is_def_line(line)) {
      kinds.push_back(LineKind::DefStart);
    } else {
      kinds.push_back(LineKind::Top);
    }
  }
  return kinds;
}

struct Unit {
  BlockKind kind;
  std::size_t first;
  std::size_t last;
  bool has_header = false;  // def/class line seen (decorator-only units wait for it)
};

std::string strip_comment_marker(std::string_view line) {
  auto t = trim(line);
  std::size_t i = 0;
  while (i < t.size() && t[i] == '#') ++i;
  return trim(std::string_view(t).substr(i));
}

bool is_comment_line(std::string_view line) {
  auto t = trim(line);
  return !t.empty() && t[0] == '#';
}

// Parses a string literal starting at text[pos] (after optional prefix);
// returns its raw contents or nullopt.
std::optional<std::string> string_literal_at(std::string_view text, std::size_t pos) {
  while (pos < text.size() && std::string_view("rRuUbBfF").find(text[pos]) != std::string_view::npos) ++pos;
  if (pos >= text.size() || (text[pos] != '"' && text[pos] != '\'')) return std::nullopt;
  const char q = text[pos];
  const bool triple = text.substr(pos, 3) == std::string(3, q);
  const std::string close = triple ? std::string(3, q) : std::string(1, q);
  std::size_t i = pos + close.size();
  std::string content;
  while (i < text.size()) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      content.push_back(text[i + 1]);
      i += 2;
      continue;
    }
    if (text.substr(i, close.size()) == close) return content;
    if (!triple && text[i] == '\n') return std::nullopt;
    content.push_back(text[i++]);
  }
  return std::nullopt;
}

// Index of the line that ends the def/class header starting at `start`.
std::size_t header_end(const std::vector<std::string>& lines, std::size_t start) {
  PyScanner scanner;
  for (std::size_t i = start; i < lines.size(); ++i) {
    std::string masked;
    scanner.scan(lines[i], &masked);
    if (!scanner.in_continuation()) {
      auto t = trim(masked);
      if (!t.empty() && t.back() == ':') return i;
    }
  }
  return start;
}

std::string join_comments(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
  std::string joined;
  for (std::size_t i = from; i < to; ++i) {
    joined += strip_comment_marker(lines[i]);
    joined += ' ';
  }
  return normalize_whitespace(joined);
}

}  // namespace

std::vector<CodeBlock> segment_blocks(std::string_view source_text, std::string_view file_id) {
  const auto lines = split_lines(source_text);
  const auto kinds = classify(lines);
  if (std::all_of(kinds.begin(), kinds.end(), [](LineKind k) { return k == LineKind::Blank; })) {
    throw Error(Errc::EmptyFile, std::string(file_id) + " has no non-blank lines");
  }

  std::vector<Unit> units;
  auto current = [&]() -> Unit* { return units.empty() ? nullptr : &units.back(); };
  bool saw_blank_since_last = false;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const LineKind k = kinds[i];
    if (k == LineKind::Blank) {
      saw_blank_since_last = true;
      continue;
    }
    Unit* cur = current();
    if (k == LineKind::DefStart || k == LineKind::Decorator) {
      const bool joins_decorators = cur && cur->kind == BlockKind::Definition && !cur->has_header;
      if (joins_decorators) {
        cur->last = i;
      } else {
        // comment lines directly above the definition move into it
        std::size_t first = i;
        if (cur && cur->kind == BlockKind::Module && !saw_blank_since_last) {
          while (first > cur->first && kinds[first - 1] == LineKind::TopComment) --first;
          if (first == cur->first && kinds[first] == LineKind::TopComment) {
            units.pop_back();
          } else if (first < i) {
            cur->last = first - 1;
            while (cur->last > cur->first && kinds[cur->last] == LineKind::Blank) --cur->last;
          }
        }
        units.push_back({BlockKind::Definition, first, i, false});
      }
      if (k == LineKind::DefStart) units.back().has_header = true;
    } else if (k == LineKind::Continued) {
      if (cur) {
        cur->last = i;
      } else {
        units.push_back({BlockKind::Module, i, i, false});
      }
    } else {  // Top or TopComment
      if (cur && cur->kind == BlockKind::Module) {
        cur->last = i;
      } else if (cur && cur->kind == BlockKind::Definition && !cur->has_header) {
        cur->last = i;  // stray line between decorator and def
      } else {
        units.push_back({BlockKind::Module, i, i, false});
      }
    }
    saw_blank_since_last = false;
  }

  std::vector<CodeBlock> blocks;
  blocks.reserve(units.size());
  for (const auto& u : units) {
    CodeBlock b;
    b.file_id = std::string(file_id);
    b.index_in_file = blocks.size();
    b.block_id = b.file_id + "#" + std::to_string(b.index_in_file);
    b.kind = u.kind;
    b.first_line = u.first;
    b.last_line = u.last;
    for (std::size_t i = u.first; i <= u.last; ++i) b.text += lines[i];
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::string extract_nl_description(const CodeBlock& block) {
  const auto lines = split_lines(block.text);
  std::size_t i = 0;
  while (i < lines.size() && (is_comment_line(lines[i]) || trim(lines[i]).empty())) ++i;
  const std::size_t leading_end = i;
  std::size_t leading_begin = 0;
  while (leading_begin < leading_end && trim(lines[leading_begin]).empty()) ++leading_begin;

  std::size_t body = i;
  if (block.kind == BlockKind::Definition) {
    while (i < lines.size() && !trim(lines[i]).empty() && trim(lines[i])[0] == '@') ++i;
    if (i < lines.size()) body = header_end(lines, i) + 1;
  }

  // docstring: first statement of the body (or of the module block)
  std::size_t s = body;
  while (s < lines.size() && trim(lines[s]).empty()) ++s;
  if (s < lines.size() && !is_comment_line(lines[s])) {
    std::string rest;
    for (std::size_t j = s; j < lines.size(); ++j) rest += lines[j];
    const auto first = rest.find_first_not_of(" \t");
    if (first != std::string::npos) {
      if (auto doc = string_literal_at(rest, first)) {
        auto normalized = normalize_whitespace(*doc);
        if (!normalized.empty()) return normalized;
      }
    }
  }

  if (leading_end > leading_begin) {
    auto comments = join_comments(lines, leading_begin, leading_end);
    if (!comments.empty()) return comments;
  }

  // comments opening the body of a definition
  if (block.kind == BlockKind::Definition) {
    std::size_t j = body;
    while (j < lines.size() && trim(lines[j]).empty()) ++j;
    std::size_t end = j;
    while (end < lines.size() && is_comment_line(lines[end])) ++end;
    if (end > j) return join_comments(lines, j, end);
  }
  return {};
}

std::vector<std::string> called_names(std::string_view code) {
  std::string masked;
  masked.reserve(code.size());
  PyScanner scanner;
  for (const auto& line : split_lines(code)) scanner.scan(line, &masked);

  std::vector<std::string> names;
  std::set<std::string> defined;
  std::string prev_word;
  std::size_t i = 0;
  while (i < masked.size()) {
    const char c = masked[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < masked.size() && is_ident_char(masked[j])) ++j;
      std::string word = masked.substr(i, j - i);
      std::size_t k = j;
      while (k < masked.size() && (masked[k] == ' ' || masked[k] == '\t')) ++k;
      const bool is_call = k < masked.size() && masked[k] == '(';
      const bool is_definition = prev_word == "def" || prev_word == "class";
      if (is_definition) {
        defined.insert(word);
      } else if (is_call && !kPythonKeywords.contains(word)) {
        names.push_back(word);
      }
      prev_word = std::move(word);
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < masked.size() && is_ident_char(masked[i])) ++i;
      prev_word.clear();
    } else {
      if (!std::isspace(static_cast<unsigned char>(c))) prev_word.clear();
      ++i;
    }
  }
  std::erase_if(names, [&](const std::string& n) { return defined.contains(n); });
  return names;
}

std::vector<std::string> match_apis(const CodeBlock& block, const docstore::DocStore& store, std::uint64_t rng_seed) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& name : called_names(block.text)) {
    const auto& candidates = store.ids_by_name(name);
    if (candidates.empty()) continue;
    std::string chosen = candidates.front();
    if (candidates.size() > 1) {
      SeededRng rng(derive_seed(rng_seed, {block.file_id, block.block_id, name}));
      chosen = candidates[rng.below(candidates.size())];
    }
    if (seen.insert(chosen).second) out.push_back(std::move(chosen));
  }
  return out;
}

std::vector<CodeBlock> prepare_blocks(std::string_view source_text, std::string_view file_id,
                                      const docstore::DocStore& store, std::uint64_t rng_seed) {
  auto blocks = segment_blocks(source_text, file_id);
  for (auto& b : blocks) {
    b.nl_description = extract_nl_description(b);
    b.matched_api_ids = match_apis(b, store, rng_seed);
  }
  return blocks;
}

std::vector<RetrievalExample> build_retrieval_examples(const std::vector<CodeBlock>& blocks, const docstore::DocStore& store,
                                                       std::size_t neg_ratio, std::uint64_t rng_seed) {
  if (neg_ratio == 0) throw Error(Errc::InvalidArgs, "negative ratio must be >= 1");
  std::vector<RetrievalExample> out;
  for (const auto& block : blocks) {
    if (block.nl_description.empty()) continue;
    const std::set<std::string> related(block.matched_api_ids.begin(), block.matched_api_ids.end());
    for (const auto& positive : block.matched_api_ids) {
      const auto& record = store.at(positive);
      std::vector<std::string> eligible;
      for (const auto& id : store.ids_by_library(record.library)) {
        if (!related.contains(id)) eligible.push_back(id);
      }
      SeededRng rng(derive_seed(rng_seed, {block.file_id, block.block_id, positive}));
      const std::size_t take = std::min(neg_ratio, eligible.size());
      // partial Fisher-Yates: the first `take` slots are the sample
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(eligible[i], eligible[i + rng.below(eligible.size() - i)]);
      }
      eligible.resize(take);
      out.push_back({block.block_id, block.nl_description, positive, std::move(eligible), take < neg_ratio});
    }
  }
  return out;
}

PretrainDocument build_pretrain_doc(const std::vector<CodeBlock>& blocks, const docstore::DocStore& store,
                                    const FileQualitySignals& signals, double noise_rate, std::uint64_t rng_seed) {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error(Errc::InvalidArgs, "noise rate must lie in [0, 1]");
  PretrainDocument doc;
  doc.weight = resample_weight(signals);
  if (!blocks.empty()) doc.file_id = blocks.front().file_id;

  for (const auto& block : blocks) {
    PretrainSegment seg;
    seg.block_text = block.text;
    SeededRng rng(derive_seed(rng_seed, {block.file_id, block.block_id, "pretrain"}));
    std::set<std::string> used(block.matched_api_ids.begin(), block.matched_api_ids.end());
    std::vector<std::string> ids = block.matched_api_ids;
    for (const auto& true_id : block.matched_api_ids) {
      if (!rng.bernoulli(noise_rate)) continue;
      std::vector<std::string> pool;
      for (const auto& id : store.ids_by_library(store.at(true_id).library)) {
        if (!used.contains(id)) pool.push_back(id);
      }
      if (pool.empty()) continue;
      auto noise = pool[rng.below(pool.size())];
      used.insert(noise);
      ids.push_back(std::move(noise));
      ++seg.noise_count;
    }
    rng.shuffle(ids);
    for (const auto& id : ids) seg.api_info_lines.push_back(docstore::api_info_line(store.at(id)));
    doc.segments.push_back(std::move(seg));
  }
  return doc;
}

std::string render_pretrain_text(const PretrainDocument& doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.segments.size(); ++i) {
    if (i > 0) out += '\n';
    out += prompt::render_api_block(doc.segments[i].api_info_lines);
    out += doc.segments[i].block_text;
    if (!out.empty() && out.back() != '\n') out += '\n';
  }
  return out;
}

FileQualitySignals count_api_signals(const std::vector<CodeBlock>& blocks, const docstore::DocStore& store,
                                     std::uint64_t star_count, double unit_test_rate) {
  std::set<std::string> names;
  for (const auto& b : blocks) {
    for (auto& n : called_names(b.text)) {
      if (!store.ids_by_name(n).empty()) names.insert(std::move(n));
    }
  }
  FileQualitySignals s;
  s.star_count = star_count;
  s.unit_test_rate = unit_test_rate;
  s.api_name_count = names.size();
  s.api_match_count = 0;
  for (const auto& n : names) s.api_match_count += store.ids_by_name(n).size();
  return s;
}

void validate_signals(const FileQualitySignals& s) {
  if (!(s.unit_test_rate >= 0.0 && s.unit_test_rate <= 1.0)) {
    throw Error(Errc::InvalidSignals, "unit test rate must lie in [0, 1]");
  }
  if (s.api_name_count == 0) throw Error(Errc::InvalidSignals, "API name count must be >= 1");
  if (s.api_match_count < s.api_name_count) throw Error(Errc::InvalidSignals, "API match count below API name count");
}

double resample_weight(const FileQualitySignals& s) {
  validate_signals(s);
  const double w_star = 1.0 + std::clamp(std::log(static_cast<double>(s.star_count) + 1.0), 0.0, 5.0) * 0.2;
  const double w_ut = std::clamp(0.5 + (1.0 - s.unit_test_rate), 0.0, 1.0);
  const double ratio = static_cast<double>(s.api_match_count) / static_cast<double>(s.api_name_count);
  const double w_api = 5.0 - std::clamp(std::log(ratio), 0.0, 5.0) * 0.2;
  return w_star * w_ut * w_api;
}

std::vector<std::string> weighted_sample(const std::vector<PretrainDocument>& docs, std::size_t count, std::uint64_t rng_seed) {
  if (docs.empty()) throw Error(Errc::InvalidArgs, "cannot sample from an empty document list");
  if (count == 0) throw Error(Errc::InvalidArgs, "sample count must be >= 1");
  std::vector<double> cumulative;
  cumulative.reserve(docs.size());
  double total = 0.0;
  for (const auto& d : docs) {
    if (!(d.weight > 0.0)) throw Error(Errc::InvalidArgs, "document " + d.file_id + " has non-positive weight");
    total += d.weight;
    cumulative.push_back(total);
  }
  SeededRng rng(derive_seed(rng_seed, {"weighted_sample"}));
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.unit() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    out.push_back(docs[static_cast<std::size_t>(it - cumulative.begin())].file_id);
  }
  return out;
}

std::string retrieval_example_json(const RetrievalExample& e) {
  ordered_json j;
  j["block_id"] = e.block_id;
  j["description"] = e.description;
  j["positive"] = e.positive;
  j["negatives"] = e.negatives;
  j["short_negatives"] = e.short_negatives;
  return j.dump();
}

std::string pretrain_document_json(const PretrainDocument& doc) {
  ordered_json segments = ordered_json::array();
  for (const auto& s : doc.segments) {
    ordered_json seg;
    seg["apis"] = s.api_info_lines;
    seg["code"] = s.block_text;
    seg["noise"] = s.noise_count;
    segments.push_back(std::move(seg));
  }
  // nlohmann picks the shortest round-trip form for doubles; the weight is
  // spliced in by hand to keep exactly six decimals
  return "{\"file_id\":" + ordered_json(doc.file_id).dump() + ",\"weight\":" + format_fixed(doc.weight, 6) +
         ",\"segments\":" + segments.dump() + "}";
}

std::map<std::string, SignalsEntry> load_signals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open signals file " + path);
  std::map<std::string, SignalsEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      SignalsEntry e;
      e.star_count = j.value("star_count", std::uint64_t{0});
      e.unit_test_rate = j.value("unit_test_rate", 0.0);
      e.api_name_count = j.value("api_name_count", std::uint64_t{0});
      e.api_match_count = j.value("api_match_count", std::uint64_t{0});
      out[j.at("path").get<std::string>()] = e;
    } catch (const json::exception& ex) {
      throw Error(Errc::InvalidSignals, "line " + std::to_string(line_no) + ": " + ex.what(), line_no);
    }
  }
  return out;
}

CorpusOutputs build_corpus(const std::string& corpus_dir, const std::map<std::string, SignalsEntry>& signals,
                           const docstore::DocStore& store, const CorpusOptions& options) {
  if (!fs::is_directory(corpus_dir)) throw Error(Errc::Io, "corpus directory not found: " + corpus_dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".py") {
      files.push_back(fs::relative(entry.path(), corpus_dir).generic_string());
    }
  }
  std::sort(files.begin(), files.end());

  struct FileResult {
    std::vector<RetrievalExample> examples;
    std::optional<PretrainDocument> doc;
  };
  std::vector<FileResult> results(files.size());
  parallel_for(files.size(), options.workers, [&](std::size_t i) {
    const auto& file_id = files[i];
    const auto source = read_file((fs::path(corpus_dir) / file_id).string());
    std::vector<CodeBlock> blocks;
    try {
      blocks = prepare_blocks(source, file_id, store, options.seed);
    } catch (const Error& e) {
      if (e.code() == Errc::EmptyFile) return;
      throw;
    }
    results[i].examples = build_retrieval_examples(blocks, store, options.neg_ratio, options.seed);

    SignalsEntry given;
    if (auto it = signals.find(file_id); it != signals.end()) given = it->second;
    auto s = count_api_signals(blocks, store, given.star_count, given.unit_test_rate);
    if (given.api_name_count > 0) s.api_name_count = given.api_name_count;
    if (given.api_match_count > 0) s.api_match_count = given.api_match_count;
    if (s.api_name_count == 0) return;
    results[i].doc = build_pretrain_doc(blocks, store, s, options.noise_rate, options.seed);
  });

  CorpusOutputs out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto& r = results[i];
    if (!r.doc) out.skipped_files.push_back(files[i]);
    out.examples.insert(out.examples.end(), std::make_move_iterator(r.examples.begin()), std::make_move_iterator(r.examples.end()));
    if (r.doc) out.documents.push_back(std::move(*r.doc));
  }
  return out;
}

}  // namespace privapi::corpus
