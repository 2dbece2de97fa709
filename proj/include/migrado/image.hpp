#pragma once

#include <cstddef>
#include <cstdint>

#include "migrado/common.hpp"

namespace migrado {

/// 8-bit RGBA raster, row-major, no padding.
struct RgbaImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Bytes pixels;

  std::size_t stride() const noexcept { return static_cast<std::size_t>(width) * 4; }
};

struct GifFirstFrame {
  RgbaImage image;          // logical-screen sized
  std::size_t frame_count;  // images in the stream, including the first
  bool interlaced;          // whether the first frame was stored interlaced
};

/// Decodes the first frame of a GIF87a/GIF89a stream onto its logical
/// screen. The transparent index (if any) maps to alpha 0 with the
/// palette's RGB. Pixels outside the frame take the transparent entry when
/// there is one and palette entry 0 otherwise; the background index in the
/// screen descriptor is ignored, as in Pillow.
/// Throws Error(malformed_input).
GifFirstFrame decode_gif_first_frame(ByteView data);

struct PngOptions {
  int compression_level = 6;
};

/// Colour type 6, bit depth 8, filter type 0 on every scanline, a single
/// IDAT. Output depends only on the image and the options.
Bytes encode_png(const RgbaImage& image, const PngOptions& options = {});

}  // namespace migrado
