#include <doctest.h>

#include <random>

#include "migrado/kernels.hpp"

using namespace migrado;
namespace k = migrado::kernels;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n, bool texty) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) {
    b = static_cast<std::uint8_t>(rng());
    if (texty && rng() % 8) b = static_cast<std::uint8_t>('a' + rng() % 26);
  }
  return v;
}

// Naive forms written from the kernel contracts.
std::size_t naive_binary(const std::vector<std::uint8_t>& v) {
  std::size_t n = 0;
  for (auto c : v) n += (c <= 0x08) || c == 0x0B || (c >= 0x0E && c <= 0x1A) || (c >= 0x1C && c <= 0x1F);
  return n;
}

std::size_t naive_markup(const std::vector<std::uint8_t>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == '&' || v[i] == '<' || v[i] == '>') return i;
  return v.size();
}

}  // namespace

TEST_CASE("scalar kernels follow their contracts") {
  std::mt19937_64 rng(1);
  std::uint32_t lut[256];
  for (auto& e : lut) e = static_cast<std::uint32_t>(rng());
  for (std::size_t n : {0u, 1u, 7u, 31u, 32u, 33u, 100u, 1000u}) {
    auto idx = random_bytes(rng, n, false);
    std::vector<std::uint32_t> out(n);
    k::scalar::expand_palette(idx, lut, out);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == lut[idx[i]]);
    auto text = random_bytes(rng, n, true);
    CHECK(k::scalar::count_binary_bytes(text) == naive_binary(text));
    CHECK(k::scalar::find_markup_byte(text) == naive_markup(text));
  }
}

TEST_CASE("every supported ISA matches the scalar kernels") {
  std::mt19937_64 rng(2);
  std::uint32_t lut[256];
  for (auto& e : lut) e = static_cast<std::uint32_t>(rng());
  for (auto isa : {k::Isa::scalar, k::Isa::avx2}) {
    if (!k::supported(isa)) {
      MESSAGE("skipping unsupported ISA ", k::to_string(isa));
      continue;
    }
    CAPTURE(k::to_string(isa));
    const auto& t = k::table_for(isa);
    for (int round = 0; round < 400; ++round) {
      std::size_t n = rng() % 300;
      if (round % 50 == 0) n = 4096 + rng() % 64;
      auto idx = random_bytes(rng, n, false);
      std::vector<std::uint32_t> simd(n), ref(n);
      t.expand_palette(idx, lut, simd);
      k::scalar::expand_palette(idx, lut, ref);
      CHECK(simd == ref);

      auto text = random_bytes(rng, n, round % 2 == 0);
      CHECK(t.count_binary_bytes(text) == k::scalar::count_binary_bytes(text));
      CHECK(t.find_markup_byte(text) == k::scalar::find_markup_byte(text));
    }
    // Boundaries: each byte value at each position inside a 64-byte window.
    for (int value = 0; value < 256; ++value) {
      for (std::size_t pos = 0; pos < 64; pos += 7) {
        std::vector<std::uint8_t> v(64, 'x');
        v[pos] = static_cast<std::uint8_t>(value);
        CHECK(t.count_binary_bytes(v) == naive_binary(v));
        CHECK(t.find_markup_byte(v) == naive_markup(v));
      }
    }
  }
}

TEST_CASE("active table resolves to a supported ISA") {
  CHECK(k::supported(k::Isa::scalar));
  CHECK(k::supported(k::detected_isa()));
  std::vector<std::uint8_t> v = {'a', '<'};
  CHECK(k::active().find_markup_byte(v) == 1);
}
