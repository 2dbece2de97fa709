#include "migrado/gateway.hpp"

#include <algorithm>

#include "migrado/error.hpp"
#include "migrado/negotiation.hpp"
#include "text.hpp"

namespace migrado {

namespace {

HttpResponse plain(int status, std::string body) {
  HttpResponse r;
  r.status = status;
  r.headers.emplace_back("Content-Type", "text/plain");
  r.body = std::move(body);
  return r;
}

HttpResponse error_response(int status, Errc code, const std::string& message) {
  auto r = plain(status, std::string(errc_name(code)) + ": " + message + "\n");
  r.headers.emplace_back(kErrorHeader, std::string(errc_name(code)));
  return r;
}

bool is_hop_by_hop(std::string_view name) {
  for (std::string_view h : {"Connection", "Keep-Alive", "Transfer-Encoding", "Content-Length", "Proxy-Connection",
                             "Upgrade", "TE", "Trailer"}) {
    if (text::iequals(name, h)) return true;
  }
  return false;
}

HttpResponse relay(const FetchResponse& origin) {
  HttpResponse r;
  r.status = origin.status;
  for (const auto& [k, v] : origin.headers) {
    if (!is_hop_by_hop(k)) r.headers.emplace_back(k, v);
  }
  r.body = origin.body;
  return r;
}

}  // namespace

std::optional<std::string> HttpRequest::header(std::string_view name) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : headers) {
    if (!text::iequals(k, name)) continue;
    if (out) {
      *out += ", ";
      *out += v;
    } else {
      out = v;
    }
  }
  return out;
}

std::optional<std::string> HttpResponse::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (text::iequals(k, name)) return v;
  }
  return std::nullopt;
}

std::vector<std::string> HttpResponse::header_values(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : headers) {
    if (text::iequals(k, name)) out.push_back(v);
  }
  return out;
}

std::string_view to_string(NegotiationOutcome::Decision decision) noexcept {
  switch (decision) {
    case NegotiationOutcome::Decision::serve_original: return "accept";
    case NegotiationOutcome::Decision::serve_converted: return "convert";
    case NegotiationOutcome::Decision::not_acceptable: return "reject";
  }
  return "reject";
}

NegotiationOutcome decide(const MediaType& original, const AcceptHeader& accept, const ObsolescencePolicy& policy,
                          std::span<const ConverterDescriptor> converters) {
  NegotiationOutcome outcome;
  outcome.original_q = match_quality(original, accept, policy);
  if (!outcome.original_q.is_zero()) return outcome;

  if (auto plan = plan_conversion(converters, original, accept, policy)) {
    outcome.decision = NegotiationOutcome::Decision::serve_converted;
    outcome.plan = std::move(plan);
    return outcome;
  }

  outcome.decision = NegotiationOutcome::Decision::not_acceptable;
  outcome.available.emplace_back(original.primary(), original.sub());
  for (const auto& d : converters) {
    if (d.accepts_input(original)) outcome.available.emplace_back(d.output.primary(), d.output.sub());
  }
  std::sort(outcome.available.begin(), outcome.available.end());
  outcome.available.erase(std::unique(outcome.available.begin(), outcome.available.end()), outcome.available.end());
  return outcome;
}

Gateway::Gateway(const Store& store, const Registry& registry, ConverterRunner& runner, GatewayOptions options,
                 const Fetcher* upstream)
    : store_(store),
      registry_(registry),
      runner_(runner),
      options_(std::move(options)),
      upstream_(upstream),
      cache_(options_.cache_bytes) {}

std::optional<std::string> Gateway::request_url(const HttpRequest& request) const {
  const auto& target = request.target;
  if (target.find("://") != std::string::npos && !target.starts_with("/")) return canonicalize_url(target);
  auto host = request.header("Host");
  if (!host || host->empty() || !target.starts_with("/")) return std::nullopt;
  return canonicalize_url("http://" + *host + target);
}

Gateway::Converted Gateway::convert_once(const PreservedResource& resource, const ConverterDescriptor& descriptor) {
  CacheKey key{resource.digest, descriptor.output.to_string(), descriptor.id, descriptor.version};
  if (auto hit = cache_.lookup(key)) return Converted{hit->body, hit->notes};

  const auto flight_key = key.str();
  std::promise<Converted> promise;
  std::shared_future<Converted> flight;
  bool leader = false;
  {
    std::lock_guard lock(flights_mutex_);
    auto it = flights_.find(flight_key);
    if (it != flights_.end()) {
      flight = it->second;
    } else {
      flight = promise.get_future().share();
      flights_.emplace(flight_key, flight);
      leader = true;
    }
  }
  if (!leader) return flight.get();

  try {
    // A previous leader may have filled the cache between our miss and the lock.
    if (auto hit = cache_.lookup(key)) {
      promise.set_value(Converted{hit->body, hit->notes});
    } else {
      ++conversions_;
      auto result = runner_.run(descriptor, resource.media_type, resource.body);
      auto body = std::make_shared<const Bytes>(std::move(result.body));
      cache_.put(CacheEntry{key, body, result.notes, now_utc()});
      promise.set_value(Converted{std::move(body), std::move(result.notes)});
    }
  } catch (...) {
    promise.set_exception(std::current_exception());
  }
  {
    std::lock_guard lock(flights_mutex_);
    flights_.erase(flight_key);
  }
  return flight.get();
}

HttpResponse Gateway::handle(const HttpRequest& request) {
  if (request.method != "GET" && request.method != "HEAD") {
    auto r = plain(405, "method not allowed\n");
    r.headers.emplace_back("Allow", "GET, HEAD");
    return r;
  }

  auto url = request_url(request);
  if (!url) return plain(400, "cannot determine request URL\n");

  std::optional<FetchResponse> origin;
  bool origin_failed = false;
  if (options_.upstream_mode && upstream_ != nullptr) {
    try {
      origin = upstream_->get(*url, options_.upstream_timeout);
      if (origin->status == 200) return relay(*origin);
    } catch (const Error&) {
      origin_failed = true;
    }
  }

  AcceptHeader accept = AcceptHeader::absent();
  try {
    accept = AcceptHeader::parse(request.header("Accept"), options_.accept_mode);
  } catch (const Error& e) {
    return plain(400, std::string(e.what()) + "\n");
  }

  std::optional<PreservedResource> resource;
  try {
    resource = store_.lookup(*url);
  } catch (const Error& e) {
    return error_response(500, e.code(), e.what());
  }
  if (!resource) {
    if (origin) return relay(*origin);
    if (origin_failed && options_.upstream_strict) {
      return plain(502, "upstream unavailable and not in archive: " + *url + "\n");
    }
    return plain(404, "not in archive: " + *url + "\n");
  }

  auto table = registry_.snapshot();
  auto outcome = decide(resource->media_type, accept, options_.policy, *table);

  HttpResponse response;
  switch (outcome.decision) {
    case NegotiationOutcome::Decision::serve_original:
      response.headers.emplace_back("Content-Type", resource->media_type.to_string());
      response.headers.emplace_back("Vary", "Accept");
      response.body = to_string(resource->body);
      return response;

    case NegotiationOutcome::Decision::serve_converted: {
      auto it = std::find_if(table->begin(), table->end(),
                             [&](const ConverterDescriptor& d) { return d.id == outcome.plan->converter_id; });
      Converted converted;
      try {
        converted = convert_once(*resource, *it);
      } catch (const Error& e) {
        return error_response(500, e.code(), e.what());
      }
      response.headers.emplace_back("Content-Type", outcome.plan->target.to_string());
      response.headers.emplace_back("Vary", "Accept");
      response.headers.emplace_back(kMigratedFromHeader, resource->media_type.to_string());
      for (const auto& note : converted.notes) response.headers.emplace_back(kMigrationNoteHeader, note);
      response.body = to_string(*converted.body);
      return response;
    }

    case NegotiationOutcome::Decision::not_acceptable: {
      std::string body;
      for (const auto& t : outcome.available) body += t.essence() + "\n";
      auto r = plain(406, std::move(body));
      r.headers.emplace_back("Vary", "Accept");
      return r;
    }
  }
  return plain(500, "unreachable\n");
}

}  // namespace migrado
