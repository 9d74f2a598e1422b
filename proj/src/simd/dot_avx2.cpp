#include <immintrin.h>

#include <cmath>

#include "privapi/simd/dot.hpp"

namespace privapi::simd::detail {

double dot_avx2(const double* q, const float* v, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n & ~std::size_t{3};
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d vq = _mm256_loadu_pd(q + i);
    const __m256d vv = _mm256_cvtps_pd(_mm_loadu_ps(v + i));
    acc = _mm256_fmadd_pd(vq, vv, acc);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = body; i < n; ++i) sum = std::fma(q[i], static_cast<double>(v[i]), sum);
  return sum;
}

}  // namespace privapi::simd::detail
