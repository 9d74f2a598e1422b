#include "privapi/benchforge.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <cmath>
#include <filesystem>
#include <set>

#include "privapi/error.hpp"
#include "privapi/util.hpp"

namespace privapi::bench {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

}  // namespace

KeywordMap::KeywordMap(std::string public_library, std::string private_library,
                       std::vector<std::pair<std::string, std::string>> entries)
    : public_library_(std::move(public_library)), private_library_(std::move(private_library)), entries_(std::move(entries)) {
  for (const auto& [pub, priv] : entries_) {
    if (!is_identifier(pub) || !is_identifier(priv)) {
      throw Error(Errc::InvalidKeywordMap, "tokens must be identifiers: \"" + pub + "\" -> \"" + priv + "\"");
    }
    if (!index_.emplace(pub, priv).second) throw Error(Errc::InvalidKeywordMap, "duplicate public token \"" + pub + "\"");
  }
  for (const auto& [pub, priv] : entries_) {
    if (index_.contains(priv)) {
      throw Error(Errc::InvalidKeywordMap, "private token \"" + priv + "\" (from \"" + pub + "\") is also a public token");
    }
  }
  by_length_.resize(entries_.size());
  std::iota(by_length_.begin(), by_length_.end(), std::size_t{0});
  std::stable_sort(by_length_.begin(), by_length_.end(),
                   [&](std::size_t a, std::size_t b) { return entries_[a].first.size() > entries_[b].first.size(); });
}

const std::string* KeywordMap::lookup(std::string_view public_token) const {
  auto it = index_.find(public_token);
  return it == index_.end() ? nullptr : &it->second;
}

KeywordMap parse_keyword_map(std::string_view tsv, std::string public_library, std::string private_library) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(tsv)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto body = trim(std::string_view(line).substr(1));
      if (body.starts_with("library:")) {
        auto spec = std::string_view(body).substr(8);
        auto arrow = spec.find("->");
        if (arrow != std::string_view::npos) {
          public_library = trim(spec.substr(0, arrow));
          private_library = trim(spec.substr(arrow + 2));
        }
      }
      continue;
    }
    auto cols = split_tabs(raw);
    while (!cols.empty() && cols.back().empty()) cols.pop_back();
    if (cols.size() != 2) {
      throw Error(Errc::InvalidKeywordMap, "line " + std::to_string(line_no) + " needs exactly two tab-separated columns", line_no);
    }
    entries.emplace_back(cols[0], cols[1]);
  }
  return KeywordMap(std::move(public_library), std::move(private_library), std::move(entries));
}

KeywordMap load_keyword_map(const std::string& path) {
  const auto stem = std::filesystem::path(path).stem().string();
  std::string pub, priv;
  if (auto us = stem.find('_'); us != std::string::npos) {
    pub = stem.substr(0, us);
    priv = stem.substr(us + 1);
  }
  return parse_keyword_map(read_file(path), pub, priv);
}

std::pair<std::string, ConversionReport> convert_text(std::string_view text, const KeywordMap& map) {
  std::string out;
  out.reserve(text.size());
  ConversionReport report;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool at_boundary = i == 0 || !is_ident_char(text[i - 1]);
    bool replaced = false;
    if (at_boundary && is_ident_char(text[i])) {
      for (std::size_t e : map.by_length()) {
        const auto& [pub, priv] = map.entries()[e];
        if (text.compare(i, pub.size(), pub) != 0) continue;
        const std::size_t end = i + pub.size();
        if (end < text.size() && is_ident_char(text[end])) continue;
        out += priv;
        ++report.replaced[pub];
        i = end;
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(text[i++]);
  }
  for (const auto& [pub, _] : map.entries()) {
    if (!report.replaced.contains(pub)) report.untouched_known_tokens.push_back(pub);
  }
  return {std::move(out), std::move(report)};
}

namespace {

// "PandasEval" -> "MonkeyEval": a leading capitalised library name is renamed too
std::string convert_benchmark_name(const std::string& name, const KeywordMap& map) {
  auto converted = convert_text(name, map).first;
  if (converted != name) return converted;
  for (std::size_t idx : map.by_length()) {
    const auto& [pub, priv] = map.entries()[idx];
    if (name.starts_with(pub) && name.size() > pub.size() && std::isupper(static_cast<unsigned char>(name[pub.size()])) &&
        std::isupper(static_cast<unsigned char>(pub[0]))) {
      return priv + name.substr(pub.size());
    }
  }
  return name;
}

}  // namespace

std::vector<eval::Problem> convert_benchmark(const std::vector<eval::Problem>& problems, const KeywordMap& map,
                                             const std::map<std::string, std::string>& id_translation) {
  std::vector<eval::Problem> out;
  out.reserve(problems.size());
  for (const auto& p : problems) {
    eval::Problem q = p;
    q.problem_id = p.problem_id + "-" + map.private_library();
    q.context = convert_text(p.context, map).first;
    q.canonical_solution = convert_text(p.canonical_solution, map).first;
    q.test_code = convert_text(p.test_code, map).first;
    q.golden_api_ids.clear();
    for (const auto& id : p.golden_api_ids) {
      auto it = id_translation.find(id);
      if (it == id_translation.end()) throw Error(Errc::MissingIdTranslation, p.problem_id + ": no private counterpart for " + id);
      q.golden_api_ids.push_back(it->second);
    }
    if (!q.benchmark.empty()) q.benchmark = convert_benchmark_name(q.benchmark, map);
    out.push_back(std::move(q));
  }
  return out;
}

std::map<std::string, std::string> load_id_translation(const std::string& path) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(read_file(path))) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(raw);
    if (cols.size() != 2) throw Error(Errc::InvalidArgs, path + ":" + std::to_string(line_no) + ": expected two columns", line_no);
    out[cols[0]] = cols[1];
  }
  return out;
}

std::vector<std::string> ValidationResult::failures() const {
  std::vector<std::string> out;
  if (!count_ok) out.push_back("expected " + std::to_string(expected_count) + " problems, found " + std::to_string(count));
  for (const auto& b : buckets) {
    if (!b.ok) {
      out.push_back("bucket " + b.bucket + ": " + std::to_string(b.actual) + " problems, expected " + format_fixed(b.expected, 2) +
                    " (delta " + format_fixed(b.delta, 2) + ")");
    }
  }
  return out;
}

ValidationResult validate_manifest(const std::vector<eval::Problem>& problems, std::size_t expected_count,
                                   std::array<std::size_t, 3> ratio) {
  const std::size_t ratio_sum = ratio[0] + ratio[1] + ratio[2];
  if (ratio[0] == 0 || ratio[1] == 0 || ratio[2] == 0) throw Error(Errc::InvalidArgs, "ratio entries must be positive");

  ValidationResult v;
  v.count = problems.size();
  v.expected_count = expected_count;
  v.count_ok = problems.size() == expected_count;

  std::array<std::size_t, 3> actual{};
  for (const auto& p : problems) actual[std::min<std::size_t>(p.num_apis, 3) - 1]++;
  const std::array<const char*, 3> names{"1", "2", "3+"};
  v.ratio_ok = true;
  for (std::size_t b = 0; b < 3; ++b) {
    auto& check = v.buckets[b];
    check.bucket = names[b];
    check.actual = actual[b];
    check.expected = static_cast<double>(expected_count) * static_cast<double>(ratio[b]) / static_cast<double>(ratio_sum);
    check.delta = static_cast<double>(actual[b]) - check.expected;
    check.ok = std::abs(check.delta) <= 1.0 + 1e-9;
    v.ratio_ok = v.ratio_ok && check.ok;
  }
  return v;
}

}  // namespace privapi::bench
