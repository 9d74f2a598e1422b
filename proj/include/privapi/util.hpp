#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privapi {

// 64-bit FNV-1a. Stable across platforms, used for seeding and bucketing.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

// Derives a generator seed from a base seed and a list of stable keys.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::string_view> keys) noexcept;

// std::mt19937_64's output sequence is fixed by the standard, but the
// distributions are not; every draw below is implemented here so corpora
// are byte-identical across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [0, 1) with 53 random bits.
  double unit();
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && unit() < p); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::string trim(std::string_view text);
// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);
std::string to_lower_ascii(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);  // keeps '\n'
bool is_ident_char(char c) noexcept;

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Runs fn(i) for i in [0, count) on up to `width` threads.
void parallel_for(std::size_t count, std::size_t width, const std::function<void(std::size_t)>& fn);

// "%.6f" without locale surprises.
std::string format_fixed(double value, int decimals);

}  // namespace privapi
