#include <zlib.h>

#include <cstring>
#include <iterator>

#include "migrado/error.hpp"
#include "migrado/image.hpp"

namespace migrado {

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(Bytes& out, const char type[4], ByteView payload) {
  if (payload.size() > 0x7FFFFFFFu) throw Error(Errc::conversion_failed, "PNG chunk too large");
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  auto crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

Bytes encode_png(const RgbaImage& image, const PngOptions& options) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.stride() * image.height) {
    throw Error(Errc::conversion_failed, "invalid raster for PNG encoding");
  }

  // Filter type 0 (None) on every row.
  const std::size_t row_bytes = image.stride() + 1;
  Bytes raw(row_bytes * image.height);
  for (std::uint32_t y = 0; y < image.height; ++y) {
    raw[y * row_bytes] = 0;
    std::memcpy(raw.data() + y * row_bytes + 1, image.pixels.data() + y * image.stride(), image.stride());
  }

  uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
  Bytes compressed(compressed_size);
  if (compress2(compressed.data(), &compressed_size, raw.data(), static_cast<uLong>(raw.size()),
                options.compression_level) != Z_OK) {
    throw Error(Errc::conversion_failed, "deflate failed");
  }
  compressed.resize(compressed_size);

  static constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  Bytes out(std::begin(kSignature), std::end(kSignature));
  out.reserve(compressed.size() + 64);

  std::uint8_t ihdr[13] = {};
  for (int i = 0; i < 4; ++i) {
    ihdr[i] = static_cast<std::uint8_t>(image.width >> (24 - 8 * i));
    ihdr[4 + i] = static_cast<std::uint8_t>(image.height >> (24 - 8 * i));
  }
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 6;  // colour type: RGBA
  // compression, filter method and interlace stay 0
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace migrado
