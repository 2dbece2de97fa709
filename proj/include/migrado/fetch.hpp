#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace migrado {

inline constexpr std::string_view kCrawlerUserAgent = "migrado-crawler/1.0";

struct FetchResponse {
  int status = 0;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  /// First header with this name, compared case-insensitively.
  std::optional<std::string> header(std::string_view name) const;
};

/// Outbound HTTP GET. Throws Error(fetch_failed) when no response arrives;
/// any HTTP status is a successful fetch.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual FetchResponse get(const std::string& url, std::chrono::milliseconds timeout) const = 0;
};

class HttpFetcher final : public Fetcher {
 public:
  explicit HttpFetcher(std::string user_agent = std::string(kCrawlerUserAgent))
      : user_agent_(std::move(user_agent)) {}

  FetchResponse get(const std::string& url, std::chrono::milliseconds timeout) const override;

 private:
  std::string user_agent_;
};

}  // namespace migrado
