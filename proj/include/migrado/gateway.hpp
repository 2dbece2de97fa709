#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <future>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "migrado/conversion_cache.hpp"
#include "migrado/converters.hpp"
#include "migrado/fetch.hpp"
#include "migrado/media_type.hpp"
#include "migrado/registry.hpp"
#include "migrado/store.hpp"

namespace migrado {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct HttpRequest {
  std::string method = "GET";
  std::string target;  // origin-form path or absolute URL, as on the request line
  HeaderList headers;

  /// All values of `name`, joined with ", "; nullopt when the header is absent.
  std::optional<std::string> header(std::string_view name) const;
};

struct HttpResponse {
  int status = 200;
  HeaderList headers;
  std::string body;

  std::optional<std::string> header(std::string_view name) const;
  std::vector<std::string> header_values(std::string_view name) const;
};

struct NegotiationOutcome {
  enum class Decision { serve_original, serve_converted, not_acceptable };

  Decision decision = Decision::serve_original;
  QValue original_q;
  std::optional<ConversionPlan> plan;  // serve_converted only
  std::vector<MediaType> available;    // not_acceptable only: sorted bare types
};

std::string_view to_string(NegotiationOutcome::Decision decision) noexcept;

/// Original-first decision: serve the stored format if it earns any q > 0,
/// otherwise the best single-step conversion, otherwise 406 with every type
/// the archive could have produced.
NegotiationOutcome decide(const MediaType& original, const AcceptHeader& accept, const ObsolescencePolicy& policy,
                          std::span<const ConverterDescriptor> converters);

inline NegotiationOutcome decide(const PreservedResource& resource, const AcceptHeader& accept,
                                 const ObsolescencePolicy& policy, const Registry& registry) {
  return decide(resource.media_type, accept, policy, *registry.snapshot());
}

struct GatewayOptions {
  ObsolescencePolicy policy;
  AcceptParseMode accept_mode = AcceptParseMode::lenient;
  bool upstream_mode = false;
  bool upstream_strict = false;
  std::chrono::milliseconds upstream_timeout{2000};
  std::size_t cache_bytes = 256u * 1024 * 1024;
};

inline constexpr std::string_view kMigratedFromHeader = "X-Migrated-From";
inline constexpr std::string_view kMigrationNoteHeader = "X-Migration-Note";
inline constexpr std::string_view kErrorHeader = "X-Migrado-Error";

/// The dissemination pipeline behind the HTTP server.
class Gateway {
 public:
  /// `upstream` may be null; it is only consulted in upstream mode.
  Gateway(const Store& store, const Registry& registry, ConverterRunner& runner, GatewayOptions options,
          const Fetcher* upstream = nullptr);

  /// HEAD responses carry the GET body; the server layer discards it.
  HttpResponse handle(const HttpRequest& request);

  /// Converter executions started by this gateway (cache misses).
  std::uint64_t conversions_run() const noexcept { return conversions_.load(); }

  ConversionCache& cache() noexcept { return cache_; }
  const GatewayOptions& options() const noexcept { return options_; }

 private:
  struct Converted {
    std::shared_ptr<const Bytes> body;
    std::vector<std::string> notes;
  };

  std::optional<std::string> request_url(const HttpRequest& request) const;
  Converted convert_once(const PreservedResource& resource, const ConverterDescriptor& descriptor);

  const Store& store_;
  const Registry& registry_;
  ConverterRunner& runner_;
  GatewayOptions options_;
  const Fetcher* upstream_;
  ConversionCache cache_;
  std::atomic<std::uint64_t> conversions_{0};

  std::mutex flights_mutex_;
  std::unordered_map<std::string, std::shared_future<Converted>> flights_;
};

}  // namespace migrado
