#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "privapi/util.hpp"

namespace testing {

inline std::string fixture(const std::string& rel) { return std::string(PRIVAPI_FIXTURES) + "/" + rel; }
inline std::string data_file(const std::string& rel) { return std::string(PRIVAPI_DATA) + "/" + rel; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("privapi-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// 1 - C(n-c, k) / C(n, k), binomials from Pascal's triangle in long double
// (exact integers up to 2^64 mantissa for n <= 60).
inline long double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0L;
  static long double table[128][128] = {};
  static bool ready = false;
  if (!ready) {
    for (unsigned i = 0; i < 128; ++i) {
      table[i][0] = 1.0L;
      for (unsigned j = 1; j <= i; ++j) table[i][j] = table[i - 1][j - 1] + (j <= i - 1 ? table[i - 1][j] : 0.0L);
    }
    ready = true;
  }
  return table[n][k];
}

inline double pass_at_k_oracle(unsigned n, unsigned c, unsigned k) {
  return static_cast<double>(1.0L - binomial(n - c, k) / binomial(n, k));
}

}  // namespace testing
