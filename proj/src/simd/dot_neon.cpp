#include <arm_neon.h>

#include <cmath>

#include "privapi/simd/dot.hpp"

namespace privapi::simd::detail {

double dot_neon(const double* q, const float* v, std::size_t n) noexcept {
  // lo holds lanes 0-1, hi holds lanes 2-3
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  const std::size_t body = n & ~std::size_t{3};
  for (std::size_t i = 0; i < body; i += 4) {
    const float32x4_t vv = vld1q_f32(v + i);
    lo = vfmaq_f64(lo, vld1q_f64(q + i), vcvt_f64_f32(vget_low_f32(vv)));
    hi = vfmaq_f64(hi, vld1q_f64(q + i + 2), vcvt_high_f64_f32(vv));
  }
  double sum = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) + (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (std::size_t i = body; i < n; ++i) sum = std::fma(q[i], static_cast<double>(v[i]), sum);
  return sum;
}

}  // namespace privapi::simd::detail
