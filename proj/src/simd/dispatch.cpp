#include <cstdlib>
#include <cstring>

#include "privapi/simd/dot.hpp"

namespace privapi::simd {

namespace {

using DotFn = double (*)(const double*, const float*, std::size_t) noexcept;

DotFn kernel_for(Isa isa) noexcept {
  switch (isa) {
#if defined(PRIVAPI_HAVE_AVX2)
    case Isa::Avx2: return &detail::dot_avx2;
#endif
#if defined(PRIVAPI_HAVE_NEON)
    case Isa::Neon: return &detail::dot_neon;
#endif
    default: return &detail::dot_scalar;
  }
}

Isa resolve_active() noexcept {
  if (const char* forced = std::getenv("PRIVAPI_SIMD"); forced && std::strcmp(forced, "scalar") == 0) {
    return Isa::Scalar;
  }
  return detected_isa();
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(PRIVAPI_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(PRIVAPI_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept {
  static const Isa isa = [] {
    if (isa_available(Isa::Avx2)) return Isa::Avx2;
    if (isa_available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
  }();
  return isa;
}

Isa active_isa() noexcept {
  static const Isa isa = resolve_active();
  return isa;
}

double dot(Isa isa, std::span<const double> query, std::span<const float> row) noexcept {
  if (!isa_available(isa)) isa = Isa::Scalar;
  const std::size_t n = query.size() < row.size() ? query.size() : row.size();
  return kernel_for(isa)(query.data(), row.data(), n);
}

double dot(std::span<const double> query, std::span<const float> row) noexcept {
  return dot(active_isa(), query, row);
}

void score_rows(Isa isa, std::span<const double> query, std::span<const float> rows, std::span<double> out) noexcept {
  if (!isa_available(isa)) isa = Isa::Scalar;
  const std::size_t dim = query.size();
  if (dim == 0) {
    for (auto& s : out) s = 0.0;
    return;
  }
  const DotFn fn = kernel_for(isa);
  const std::size_t count = rows.size() / dim < out.size() ? rows.size() / dim : out.size();
  for (std::size_t r = 0; r < count; ++r) out[r] = fn(query.data(), rows.data() + r * dim, dim);
}

void score_rows(std::span<const double> query, std::span<const float> rows, std::span<double> out) noexcept {
  score_rows(active_isa(), query, rows, out);
}

}  // namespace privapi::simd
