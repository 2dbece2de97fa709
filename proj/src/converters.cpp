#include "migrado/converters.hpp"

#include <algorithm>

#include "migrado/error.hpp"
#include "migrado/image.hpp"
#include "migrado/kernels.hpp"
#include "migrado/subprocess.hpp"

namespace migrado {

namespace {

void require_types(const ConversionRequest& req, std::string_view source, std::string_view target) {
  if (req.source.essence() != source || req.target.essence() != target) {
    throw Error(Errc::source_target_mismatch, "expected " + std::string(source) + " -> " + std::string(target) +
                                                  ", got " + req.source.essence() + " -> " + req.target.essence());
  }
}

// Copies `in`, replacing every byte that does not start a well-formed UTF-8
// sequence with U+FFFD.
std::string sanitize_utf8(ByteView in) {
  static constexpr char kReplacement[] = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    std::uint8_t b = in[i];
    std::size_t len = 0;
    std::uint8_t lo = 0x80, hi = 0xBF;
    if (b < 0x80) {
      len = 1;
    } else if (b >= 0xC2 && b <= 0xDF) {
      len = 2;
    } else if (b >= 0xE0 && b <= 0xEF) {
      len = 3;
      if (b == 0xE0) lo = 0xA0;
      if (b == 0xED) hi = 0x9F;
    } else if (b >= 0xF0 && b <= 0xF4) {
      len = 4;
      if (b == 0xF0) lo = 0x90;
      if (b == 0xF4) hi = 0x8F;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      std::uint8_t c = in[i + k];
      std::uint8_t min = k == 1 ? lo : 0x80;
      std::uint8_t max = k == 1 ? hi : 0xBF;
      ok = c >= min && c <= max;
    }
    if (ok) {
      out.append(reinterpret_cast<const char*>(in.data() + i), len);
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

}  // namespace

ConversionResult convert_identity(const ConversionRequest& req) {
  if (req.source != req.target) {
    throw Error(Errc::source_target_mismatch,
                "identity needs equal types, got " + req.source.to_string() + " -> " + req.target.to_string());
  }
  return ConversionResult{Bytes(req.body.begin(), req.body.end()), req.target, {}};
}

ConversionResult convert_gif_to_png(const ConversionRequest& req) {
  require_types(req, "image/gif", "image/png");
  auto frame = decode_gif_first_frame(req.body);
  ConversionResult result{encode_png(frame.image), req.target, {}};
  if (frame.frame_count > 1) result.notes.emplace_back(kAnimatedGifNote);
  return result;
}

ConversionResult convert_text_to_html(const ConversionRequest& req) {
  require_types(req, "text/plain", "text/html");
  std::string text = sanitize_utf8(req.body);

  std::string html = "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"></head>\n<body><pre>";
  html.reserve(html.size() + text.size() + text.size() / 8 + 32);
  const auto& kernel = kernels::active();
  auto bytes = std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t hit = pos + kernel.find_markup_byte(bytes.subspan(pos));
    html.append(text, pos, hit - pos);
    if (hit == bytes.size()) break;
    switch (text[hit]) {
      case '&': html += "&amp;"; break;
      case '<': html += "&lt;"; break;
      default: html += "&gt;"; break;
    }
    pos = hit + 1;
  }
  html += "</pre></body>\n</html>\n";
  return ConversionResult{to_bytes(html), req.target, {}};
}

ConversionResult convert_external(const ConverterDescriptor& descriptor, const ConversionRequest& req,
                                  std::chrono::milliseconds timeout) {
  auto proc = run_process(descriptor.command, req.body, timeout);
  if (proc.timed_out) {
    throw Error(Errc::converter_timeout,
                "converter " + descriptor.id + " exceeded " + std::to_string(timeout.count()) + " ms");
  }
  if (!proc.exited || proc.exit_code != 0) {
    std::string why = proc.exited ? "exit status " + std::to_string(proc.exit_code)
                                  : "signal " + std::to_string(proc.signal);
    auto diag = proc.stderr_text.substr(0, proc.stderr_text.find('\n'));
    if (!diag.empty()) why += ": " + diag;
    throw Error(Errc::converter_crashed, "converter " + descriptor.id + " failed with " + why);
  }
  if (proc.stdout_bytes.empty()) throw Error(Errc::empty_output, "converter " + descriptor.id + " produced no output");
  return ConversionResult{std::move(proc.stdout_bytes), req.target, {}};
}

std::vector<ConverterDescriptor> builtin_descriptors() {
  return {
      ConverterDescriptor{std::string(kGifToPngId), MediaType("image", "gif"), MediaType("image", "png"), 100, "1.0",
                          ConverterKind::builtin, {}},
      ConverterDescriptor{std::string(kTextToHtmlId), MediaType("text", "plain"), MediaType("text", "html"), 100,
                          "1.0", ConverterKind::builtin, {}},
  };
}

bool is_builtin_id(std::string_view id) {
  return id == kGifToPngId || id == kTextToHtmlId || id == kIdentityConverterId;
}

ConverterRunner::ConverterRunner(RunnerOptions options)
    : options_(options),
      external_slots_(std::make_unique<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(std::max(1u, options.external_concurrency)))) {}

ConversionResult ConverterRunner::run(const ConverterDescriptor& descriptor, const MediaType& source, ByteView body) {
  if (!descriptor.accepts_input(source)) {
    throw Error(Errc::source_target_mismatch,
                "converter " + descriptor.id + " does not take " + source.to_string());
  }
  if (body.empty()) throw Error(Errc::malformed_input, "nothing to convert: empty body");
  ConversionRequest req{source, descriptor.output, body};
  ++invocations_;

  ConversionResult result = [&] {
    if (descriptor.kind == ConverterKind::external_command) {
      external_slots_->acquire();
      struct Release {
        std::counting_semaphore<>* sem;
        ~Release() { sem->release(); }
      } release{external_slots_.get()};
      return convert_external(descriptor, req, options_.timeout);
    }
    if (descriptor.id == kGifToPngId) return convert_gif_to_png(req);
    if (descriptor.id == kTextToHtmlId) return convert_text_to_html(req);
    if (descriptor.id == kIdentityConverterId) {
      req.target = source;
      auto r = convert_identity(req);
      r.media_type = descriptor.output;
      return r;
    }
    throw Error(Errc::conversion_failed, "no builtin converter named " + descriptor.id);
  }();

  result.media_type = descriptor.output;
  return result;
}

}  // namespace migrado
