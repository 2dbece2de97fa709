#include "migrado/fetch.hpp"

#include <httplib.h>

#include "migrado/common.hpp"
#include "migrado/error.hpp"
#include "text.hpp"

namespace migrado {

std::optional<std::string> FetchResponse::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (text::iequals(k, name)) return v;
  }
  return std::nullopt;
}

FetchResponse HttpFetcher::get(const std::string& url, std::chrono::milliseconds timeout) const {
  auto canonical = canonicalize_url(url);
  if (!canonical) throw Error(Errc::fetch_failed, "not a fetchable URL: " + url);
  auto origin = url_origin(*canonical);
  if (!origin.starts_with("http://") && !origin.starts_with("https://")) {
    throw Error(Errc::fetch_failed, "unsupported scheme: " + url);
  }
  std::string path = canonical->substr(origin.size());

  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_follow_location(true);
  client.set_keep_alive(false);

  auto result = client.Get(path, httplib::Headers{{"User-Agent", user_agent_}});
  if (!result) {
    throw Error(Errc::fetch_failed, "GET " + *canonical + " failed: " + httplib::to_string(result.error()));
  }
  FetchResponse response;
  response.status = result->status;
  for (const auto& [k, v] : result->headers) response.headers.emplace_back(k, v);
  response.body = std::move(result->body);
  return response;
}

}  // namespace migrado
