#include <cstdlib>
#include <cstring>

#include "migrado/kernels.hpp"

namespace migrado::kernels {

namespace {

constexpr KernelTable kScalar{scalar::expand_palette, scalar::count_binary_bytes, scalar::find_markup_byte};

#ifdef MIGRADO_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{avx2::expand_palette, avx2::count_binary_bytes, avx2::find_markup_byte};
#endif

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#ifdef MIGRADO_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept {
  const char* forced = std::getenv("MIGRADO_ISA");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return Isa::scalar;
  return supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& table_for(Isa isa) noexcept {
#ifdef MIGRADO_HAVE_AVX2_KERNELS
  if (isa == Isa::avx2 && supported(Isa::avx2)) return kAvx2;
#else
  (void)isa;
#endif
  return kScalar;
}

const KernelTable& active() noexcept {
  static const KernelTable& table = table_for(detected_isa());
  return table;
}

}  // namespace migrado::kernels
