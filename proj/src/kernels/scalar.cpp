#include "migrado/kernels.hpp"

namespace migrado::kernels::scalar {

void expand_palette(std::span<const std::uint8_t> indices, const std::uint32_t* lut, std::span<std::uint32_t> out) {
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = lut[indices[i]];
}

namespace {
constexpr bool is_binary_byte(std::uint8_t b) noexcept {
  return b <= 0x08 || b == 0x0B || (b >= 0x0E && b <= 0x1A) || (b >= 0x1C && b <= 0x1F);
}
}  // namespace

std::size_t count_binary_bytes(std::span<const std::uint8_t> bytes) {
  std::size_t n = 0;
  for (auto b : bytes) n += is_binary_byte(b) ? 1 : 0;
  return n;
}

std::size_t find_markup_byte(std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto b = bytes[i];
    if (b == '&' || b == '<' || b == '>') return i;
  }
  return bytes.size();
}

}  // namespace migrado::kernels::scalar
