// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "migrado/kernels.hpp"

namespace migrado::kernels::avx2 {

void expand_palette(std::span<const std::uint8_t> indices, const std::uint32_t* lut, std::span<std::uint32_t> out) {
  const auto* lut_base = reinterpret_cast<const int*>(lut);
  const std::size_t n = indices.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m128i idx8 = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(indices.data() + i));
    __m256i idx32 = _mm256_cvtepu8_epi32(idx8);
    __m256i px = _mm256_i32gather_epi32(lut_base, idx32, 4);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), px);
  }
  for (; i < n; ++i) out[i] = lut[indices[i]];
}

std::size_t count_binary_bytes(std::span<const std::uint8_t> bytes) {
  // Binary bytes are < 0x20 and not one of \t \n \f \r ESC.
  const __m256i limit = _mm256_set1_epi8(0x1F);
  const __m256i tab = _mm256_set1_epi8(0x09);
  const __m256i lf = _mm256_set1_epi8(0x0A);
  const __m256i ff = _mm256_set1_epi8(0x0C);
  const __m256i cr = _mm256_set1_epi8(0x0D);
  const __m256i esc = _mm256_set1_epi8(0x1B);
  const std::size_t n = bytes.size();
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(bytes.data() + i));
    // v <= 0x1F unsigned  <=>  min(v, 0x1F) == v
    __m256i low = _mm256_cmpeq_epi8(_mm256_min_epu8(v, limit), v);
    __m256i allowed = _mm256_or_si256(
        _mm256_or_si256(_mm256_cmpeq_epi8(v, tab), _mm256_cmpeq_epi8(v, lf)),
        _mm256_or_si256(_mm256_or_si256(_mm256_cmpeq_epi8(v, ff), _mm256_cmpeq_epi8(v, cr)),
                        _mm256_cmpeq_epi8(v, esc)));
    __m256i binary = _mm256_andnot_si256(allowed, low);
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_epi8(binary))));
  }
  return count + scalar::count_binary_bytes(bytes.subspan(i));
}

std::size_t find_markup_byte(std::span<const std::uint8_t> bytes) {
  const __m256i amp = _mm256_set1_epi8('&');
  const __m256i lt = _mm256_set1_epi8('<');
  const __m256i gt = _mm256_set1_epi8('>');
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(bytes.data() + i));
    __m256i hit = _mm256_or_si256(_mm256_or_si256(_mm256_cmpeq_epi8(v, amp), _mm256_cmpeq_epi8(v, lt)),
                                  _mm256_cmpeq_epi8(v, gt));
    auto mask = static_cast<unsigned>(_mm256_movemask_epi8(hit));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  return i + scalar::find_markup_byte(bytes.subspan(i));
}

}  // namespace migrado::kernels::avx2
