#include <algorithm>
#include <array>
#include <cstring>
#include <optional>

#include "migrado/error.hpp"
#include "migrado/image.hpp"
#include "migrado/kernels.hpp"

namespace migrado {

namespace {

constexpr std::uint32_t kMaxDimension = 16384;
constexpr std::uint64_t kMaxPixels = 64ull * 1024 * 1024;
constexpr int kMaxCodeBits = 12;
constexpr int kTableSize = 1 << kMaxCodeBits;

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::malformed_input, "malformed GIF: " + why); }

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  bool at_end() const noexcept { return pos_ >= data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  std::uint8_t u8() {
    if (at_end()) malformed("unexpected end of data");
    return data_[pos_++];
  }
  std::uint16_t u16() {
    std::uint16_t lo = u8();
    std::uint16_t hi = u8();
    return static_cast<std::uint16_t>(lo | (hi << 8));
  }
  ByteView take(std::size_t n) {
    if (remaining() < n) malformed("unexpected end of data");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  // Concatenated payload of a sub-block chain, through the zero terminator.
  Bytes sub_blocks() {
    Bytes out;
    for (;;) {
      std::uint8_t len = u8();
      if (len == 0) return out;
      auto chunk = take(len);
      out.insert(out.end(), chunk.begin(), chunk.end());
    }
  }
  void skip_sub_blocks() {
    for (;;) {
      std::uint8_t len = u8();
      if (len == 0) return;
      take(len);
    }
  }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

struct ColorTable {
  std::vector<std::array<std::uint8_t, 3>> colors;
};

ColorTable read_color_table(Reader& in, unsigned size_bits) {
  ColorTable table;
  std::size_t count = std::size_t{1} << (size_bits + 1);
  auto raw = in.take(count * 3);
  table.colors.resize(count);
  for (std::size_t i = 0; i < count; ++i) table.colors[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
  return table;
}

std::uint32_t pack_rgba(std::uint8_t r, std::uint8_t g, std::uint8_t b, std::uint8_t a) {
  const std::uint8_t px[4] = {r, g, b, a};
  std::uint32_t v;
  std::memcpy(&v, px, 4);
  return v;
}

// Decodes LZW codes into `out` (pre-sized to the frame's pixel count).
// Returns the number of indices produced. Extra indices are discarded.
std::size_t lzw_decode(ByteView data, int min_code_size, std::span<std::uint8_t> out) {
  if (min_code_size < 1 || min_code_size > 8) malformed("bad LZW minimum code size");
  const int clear = 1 << min_code_size;
  const int end_of_info = clear + 1;

  std::array<std::uint16_t, kTableSize> prefix{};
  std::array<std::uint8_t, kTableSize> suffix{};
  std::array<std::uint8_t, kTableSize> first{};
  std::array<std::uint8_t, kTableSize> stack{};
  for (int i = 0; i < clear; ++i) {
    suffix[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    first[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  }

  int width = min_code_size + 1;
  int next = clear + 2;
  int prev = -1;
  std::size_t produced = 0;

  std::uint32_t bits = 0;
  int bit_count = 0;
  std::size_t pos = 0;

  auto emit = [&](int code) {
    int depth = 0;
    int c = code;
    while (c >= clear) {
      stack[static_cast<std::size_t>(depth++)] = suffix[static_cast<std::size_t>(c)];
      c = prefix[static_cast<std::size_t>(c)];
    }
    stack[static_cast<std::size_t>(depth++)] = static_cast<std::uint8_t>(c);
    while (depth > 0 && produced < out.size()) out[produced++] = stack[static_cast<std::size_t>(--depth)];
  };
  auto add_entry = [&](int pre, std::uint8_t tail) {
    auto n = static_cast<std::size_t>(next);
    prefix[n] = static_cast<std::uint16_t>(pre);
    suffix[n] = tail;
    first[n] = first[static_cast<std::size_t>(pre)];
    ++next;
    if (next == (1 << width) && width < kMaxCodeBits) ++width;
  };

  while (produced < out.size()) {
    while (bit_count < width && pos < data.size()) {
      bits |= static_cast<std::uint32_t>(data[pos++]) << bit_count;
      bit_count += 8;
    }
    if (bit_count < width) break;  // data ran out before EOI
    int code = static_cast<int>(bits & ((1u << width) - 1));
    bits >>= width;
    bit_count -= width;

    if (code == clear) {
      width = min_code_size + 1;
      next = clear + 2;
      prev = -1;
      continue;
    }
    if (code == end_of_info) break;

    if (prev < 0) {
      if (code > clear) malformed("first code after clear is not a literal");
      emit(code);
      prev = code;
      continue;
    }

    if (code < next) {
      emit(code);
      if (next < kTableSize) add_entry(prev, first[static_cast<std::size_t>(code)]);
    } else if (code == next && next < kTableSize) {
      add_entry(prev, first[static_cast<std::size_t>(prev)]);
      emit(code);
    } else {
      malformed("LZW code out of range");
    }
    prev = code;
  }
  return produced;
}

// Row order of an interlaced frame: passes start at 0,4,2,1 with steps 8,8,4,2.
std::vector<std::uint32_t> interlaced_rows(std::uint32_t height) {
  std::vector<std::uint32_t> rows;
  rows.reserve(height);
  constexpr std::uint32_t start[4] = {0, 4, 2, 1};
  constexpr std::uint32_t step[4] = {8, 8, 4, 2};
  for (int pass = 0; pass < 4; ++pass) {
    for (std::uint32_t y = start[pass]; y < height; y += step[pass]) rows.push_back(y);
  }
  return rows;
}

}  // namespace

GifFirstFrame decode_gif_first_frame(ByteView data) {
  Reader in(data);
  auto signature = in.take(6);
  if (std::memcmp(signature.data(), "GIF87a", 6) != 0 && std::memcmp(signature.data(), "GIF89a", 6) != 0) {
    malformed("bad signature");
  }
  const std::uint32_t screen_w = in.u16();
  const std::uint32_t screen_h = in.u16();
  const std::uint8_t screen_flags = in.u8();
  in.u8();  // background colour index, unused
  in.u8();  // pixel aspect ratio
  if (screen_w == 0 || screen_h == 0) malformed("zero-sized logical screen");
  if (screen_w > kMaxDimension || screen_h > kMaxDimension ||
      static_cast<std::uint64_t>(screen_w) * screen_h > kMaxPixels) {
    malformed("logical screen too large");
  }

  std::optional<ColorTable> global;
  if (screen_flags & 0x80) global = read_color_table(in, screen_flags & 0x07);

  GifFirstFrame result{};
  result.image.width = screen_w;
  result.image.height = screen_h;

  int pending_transparent = -1;  // from the last graphic control extension
  bool have_first = false;

  while (true) {
    if (in.at_end()) {
      if (have_first) break;
      malformed("no image data");
    }
    std::uint8_t introducer = in.u8();
    if (introducer == 0x3B) break;

    if (introducer == 0x21) {
      std::uint8_t label = in.u8();
      if (label == 0xF9 && !have_first) {
        auto block = in.sub_blocks();
        if (block.size() < 4) malformed("short graphic control extension");
        if (block[0] & 0x01) {
          pending_transparent = block[3];
        } else {
          pending_transparent = -1;
        }
      } else {
        in.skip_sub_blocks();
      }
      continue;
    }

    if (introducer != 0x2C) {
      if (have_first) break;  // trailing junk after a complete first frame
      malformed("unknown block introducer");
    }

    const std::uint32_t fx = in.u16();
    const std::uint32_t fy = in.u16();
    const std::uint32_t fw = in.u16();
    const std::uint32_t fh = in.u16();
    const std::uint8_t frame_flags = in.u8();
    std::optional<ColorTable> local;
    if (frame_flags & 0x80) local = read_color_table(in, frame_flags & 0x07);
    const int min_code_size = in.u8();

    if (have_first) {
      in.skip_sub_blocks();
      ++result.frame_count;
      continue;
    }

    auto compressed = in.sub_blocks();
    have_first = true;
    result.frame_count = 1;
    result.interlaced = (frame_flags & 0x40) != 0;

    const ColorTable* palette = local ? &*local : (global ? &*global : nullptr);
    if (palette == nullptr) malformed("frame has no colour table");

    std::array<std::uint32_t, 256> lut;
    lut.fill(pack_rgba(0, 0, 0, 255));
    for (std::size_t i = 0; i < palette->colors.size() && i < 256; ++i) {
      const auto& c = palette->colors[i];
      lut[i] = pack_rgba(c[0], c[1], c[2], 255);
    }
    if (pending_transparent >= 0) {
      auto& px = lut[static_cast<std::size_t>(pending_transparent)];
      std::uint8_t rgba[4];
      std::memcpy(rgba, &px, 4);
      px = pack_rgba(rgba[0], rgba[1], rgba[2], 0);
    }

    // Uncovered canvas takes the transparent entry, or palette entry 0.
    const std::uint32_t fill = lut[static_cast<std::size_t>(std::max(pending_transparent, 0))];
    result.image.pixels.resize(result.image.stride() * screen_h);
    {
      auto* canvas = reinterpret_cast<std::uint32_t*>(result.image.pixels.data());
      std::fill(canvas, canvas + static_cast<std::size_t>(screen_w) * screen_h, fill);
    }

    Bytes indices(static_cast<std::size_t>(fw) * fh, 0);
    std::size_t produced = lzw_decode(compressed, min_code_size, indices);

    std::vector<std::uint32_t> row_order;
    if (result.interlaced) row_order = interlaced_rows(fh);

    const auto& kernel = kernels::active();
    const std::uint32_t visible_w = fx >= screen_w ? 0 : std::min(fw, screen_w - fx);
    for (std::uint32_t stored_row = 0; stored_row < fh && visible_w > 0; ++stored_row) {
      // Rows the stream never reached keep the fill.
      if (static_cast<std::size_t>(stored_row) * fw >= produced) break;
      std::uint32_t y = result.interlaced ? row_order[stored_row] : stored_row;
      if (fy + y >= screen_h) continue;
      std::size_t avail = std::min<std::size_t>(visible_w, produced - static_cast<std::size_t>(stored_row) * fw);
      auto src = std::span<const std::uint8_t>(indices).subspan(static_cast<std::size_t>(stored_row) * fw, avail);
      auto* dst = reinterpret_cast<std::uint32_t*>(result.image.pixels.data() +
                                                   (static_cast<std::size_t>(fy + y) * screen_w + fx) * 4);
      kernel.expand_palette(src, lut.data(), std::span<std::uint32_t>(dst, avail));
    }
  }

  return result;
}

}  // namespace migrado
