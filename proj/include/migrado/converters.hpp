#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "migrado/common.hpp"
#include "migrado/media_type.hpp"
#include "migrado/registry.hpp"

namespace migrado {

struct ConversionRequest {
  MediaType source;
  MediaType target;
  ByteView body;
};

struct ConversionResult {
  Bytes body;
  MediaType media_type;
  std::vector<std::string> notes;
};

inline constexpr std::string_view kGifToPngId = "gif2png";
inline constexpr std::string_view kTextToHtmlId = "text2html";
inline constexpr std::string_view kAnimatedGifNote = "animated-gif: first frame only";

/// Requires source == target. Throws SourceTargetMismatch.
ConversionResult convert_identity(const ConversionRequest& req);

/// First frame of the GIF as an RGBA PNG. Throws SourceTargetMismatch,
/// MalformedInput or ConversionFailed.
ConversionResult convert_gif_to_png(const ConversionRequest& req);

/// Plain text (UTF-8, invalid sequences replaced by U+FFFD) wrapped in an
/// HTML document inside a <pre> block, with &, < and > escaped.
ConversionResult convert_text_to_html(const ConversionRequest& req);

/// Pipes the body through `descriptor.command`: source bytes on stdin,
/// target bytes on stdout, exit status 0. Throws ConverterCrashed,
/// ConverterTimeout or EmptyOutput.
ConversionResult convert_external(const ConverterDescriptor& descriptor, const ConversionRequest& req,
                                  std::chrono::milliseconds timeout);

/// Descriptors for the converters compiled into this binary.
std::vector<ConverterDescriptor> builtin_descriptors();
bool is_builtin_id(std::string_view id);

struct RunnerOptions {
  std::chrono::milliseconds timeout{30000};
  unsigned external_concurrency = 4;
};

/// Executes registry descriptors: builtins by id, external commands through
/// a bounded number of concurrent child processes.
class ConverterRunner {
 public:
  explicit ConverterRunner(RunnerOptions options = {});

  /// Throws the converter's errors; the result's media type is always
  /// `descriptor.output`.
  ConversionResult run(const ConverterDescriptor& descriptor, const MediaType& source, ByteView body);

  /// Number of run() calls that reached a converter.
  std::uint64_t invocations() const noexcept { return invocations_.load(); }

  const RunnerOptions& options() const noexcept { return options_; }

 private:
  RunnerOptions options_;
  std::unique_ptr<std::counting_semaphore<>> external_slots_;
  std::atomic<std::uint64_t> invocations_{0};
};

}  // namespace migrado
