#pragma once

// Byte-level inner loops used by the image and text paths. Each kernel has
// a portable scalar implementation and, on x86-64, an AVX2 one; the widest
// variant the CPU supports is picked once at first use.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace migrado::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  /// out[i] = lut[indices[i]]; lut has 256 entries, out.size() == indices.size().
  void (*expand_palette)(std::span<const std::uint8_t> indices, const std::uint32_t* lut,
                         std::span<std::uint32_t> out);
  /// Number of bytes in 0x00-0x08, 0x0B, 0x0E-0x1A, 0x1C-0x1F.
  std::size_t (*count_binary_bytes)(std::span<const std::uint8_t> bytes);
  /// Index of the first '&', '<' or '>', or bytes.size().
  std::size_t (*find_markup_byte)(std::span<const std::uint8_t> bytes);
};

/// Whether this CPU (and build) can run `isa`.
bool supported(Isa isa) noexcept;

/// Best supported ISA, unless MIGRADO_ISA=scalar is set in the environment.
Isa detected_isa() noexcept;

/// Table for a specific ISA; falls back to scalar if unsupported.
const KernelTable& table_for(Isa isa) noexcept;

/// Table for detected_isa(), resolved once.
const KernelTable& active() noexcept;

namespace scalar {
void expand_palette(std::span<const std::uint8_t> indices, const std::uint32_t* lut, std::span<std::uint32_t> out);
std::size_t count_binary_bytes(std::span<const std::uint8_t> bytes);
std::size_t find_markup_byte(std::span<const std::uint8_t> bytes);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MIGRADO_HAVE_AVX2_KERNELS 1
namespace avx2 {
void expand_palette(std::span<const std::uint8_t> indices, const std::uint32_t* lut, std::span<std::uint32_t> out);
std::size_t count_binary_bytes(std::span<const std::uint8_t> bytes);
std::size_t find_markup_byte(std::span<const std::uint8_t> bytes);
}  // namespace avx2
#endif

}  // namespace migrado::kernels
