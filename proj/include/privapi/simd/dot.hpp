#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Inner-product kernels behind the retrieval index.
//
// Every variant accumulates in four double lanes (element i goes to lane
// i % 4) with fused multiply-add, reduces as (l0 + l1) + (l2 + l3), then
// folds the tail sequentially. The scalar reference follows the same order,
// so all variants are bitwise identical.
namespace privapi::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

// Best ISA supported by this CPU and build.
Isa detected_isa() noexcept;
// detected_isa(), unless PRIVAPI_SIMD=scalar forces the reference path.
Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;

double dot(std::span<const double> query, std::span<const float> row) noexcept;
double dot(Isa isa, std::span<const double> query, std::span<const float> row) noexcept;

// out[r] = dot(query, rows[r * dim .. (r + 1) * dim)); dim == query.size().
void score_rows(std::span<const double> query, std::span<const float> rows, std::span<double> out) noexcept;
void score_rows(Isa isa, std::span<const double> query, std::span<const float> rows, std::span<double> out) noexcept;

namespace detail {
double dot_scalar(const double* q, const float* v, std::size_t n) noexcept;
#if defined(PRIVAPI_HAVE_AVX2)
double dot_avx2(const double* q, const float* v, std::size_t n) noexcept;
#endif
#if defined(PRIVAPI_HAVE_NEON)
double dot_neon(const double* q, const float* v, std::size_t n) noexcept;
#endif
}  // namespace detail

}  // namespace privapi::simd
