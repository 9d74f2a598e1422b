#include <cmath>

#include "privapi/simd/dot.hpp"

namespace privapi::simd::detail {

double dot_scalar(const double* q, const float* v, std::size_t n) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t body = n & ~std::size_t{3};
  for (std::size_t i = 0; i < body; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      lane[l] = std::fma(q[i + l], static_cast<double>(v[i + l]), lane[l]);
    }
  }
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = body; i < n; ++i) sum = std::fma(q[i], static_cast<double>(v[i]), sum);
  return sum;
}

}  // namespace privapi::simd::detail
