#include "migrado/config.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "migrado/error.hpp"
#include "migrado/regclient.hpp"

namespace migrado {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "listen_address", "store_path",          "obsolete_types",        "upstream_mode",
      "upstream_strict", "upstream_timeout_ms", "cache_bytes",           "external_concurrency",
      "converter_timeout_ms", "strict_accept_parsing", "permission_stub", "registry_urls",
      "builtin_converters"};
  return keys;
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::invalid_config, std::string("config key ") + key + " has the wrong type");
  }
}

}  // namespace

void Config::validate() const {
  try {
    (void)policy();
  } catch (const Error& e) {
    throw Error(Errc::invalid_config, std::string("obsolete_types: ") + e.what());
  }
  for (const auto& id : builtin_converters) {
    bool known = false;
    for (const auto& d : builtin_descriptors()) known = known || d.id == id;
    if (!known) throw Error(Errc::invalid_config, "builtin_converters: no builtin named " + id);
  }
  (void)listen_endpoint();
  if (store_path.empty()) throw Error(Errc::invalid_config, "store_path is empty");
  if (external_concurrency == 0) throw Error(Errc::invalid_config, "external_concurrency must be at least 1");
}

GatewayOptions Config::gateway_options() const {
  GatewayOptions o;
  o.policy = policy();
  o.accept_mode = strict_accept_parsing ? AcceptParseMode::strict : AcceptParseMode::lenient;
  o.upstream_mode = upstream_mode;
  o.upstream_strict = upstream_strict;
  o.upstream_timeout = std::chrono::milliseconds(upstream_timeout_ms);
  o.cache_bytes = static_cast<std::size_t>(cache_bytes);
  return o;
}

RunnerOptions Config::runner_options() const {
  return RunnerOptions{std::chrono::milliseconds(converter_timeout_ms), external_concurrency};
}

std::pair<std::string, int> Config::listen_endpoint() const {
  auto colon = listen_address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(Errc::invalid_config, "listen_address must be host:port, got " + listen_address);
  }
  int port = -1;
  auto digits = std::string_view(listen_address).substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error(Errc::invalid_config, "bad port in listen_address " + listen_address);
  }
  auto host = listen_address.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {host, port};
}

Config parse_config(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("config is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_config, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().count(key)) throw Error(Errc::invalid_config, "unknown config key " + key);
  }
  if (j.contains("cache_bytes") && j["cache_bytes"].is_number_integer() && j["cache_bytes"].get<std::int64_t>() < 0) {
    throw Error(Errc::invalid_config, "cache_bytes must be >= 0");
  }

  Config c;
  read_key(j, "listen_address", c.listen_address);
  read_key(j, "store_path", c.store_path);
  read_key(j, "obsolete_types", c.obsolete_types);
  read_key(j, "upstream_mode", c.upstream_mode);
  read_key(j, "upstream_strict", c.upstream_strict);
  read_key(j, "upstream_timeout_ms", c.upstream_timeout_ms);
  read_key(j, "cache_bytes", c.cache_bytes);
  read_key(j, "external_concurrency", c.external_concurrency);
  read_key(j, "converter_timeout_ms", c.converter_timeout_ms);
  read_key(j, "strict_accept_parsing", c.strict_accept_parsing);
  read_key(j, "permission_stub", c.permission_stub);
  read_key(j, "registry_urls", c.registry_urls);
  read_key(j, "builtin_converters", c.builtin_converters);
  c.validate();
  return c;
}

Config load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const Config& c) {
  nlohmann::ordered_json j;
  j["listen_address"] = c.listen_address;
  j["store_path"] = c.store_path;
  j["obsolete_types"] = c.obsolete_types;
  j["upstream_mode"] = c.upstream_mode;
  j["upstream_strict"] = c.upstream_strict;
  j["upstream_timeout_ms"] = c.upstream_timeout_ms;
  j["cache_bytes"] = c.cache_bytes;
  j["external_concurrency"] = c.external_concurrency;
  j["converter_timeout_ms"] = c.converter_timeout_ms;
  j["strict_accept_parsing"] = c.strict_accept_parsing;
  j["permission_stub"] = c.permission_stub;
  j["registry_urls"] = c.registry_urls;
  j["builtin_converters"] = c.builtin_converters;
  return j.dump(2) + "\n";
}

void populate_registry(Registry& registry, const Config& config) {
  const std::set<std::string> wanted(config.builtin_converters.begin(), config.builtin_converters.end());
  for (const auto& d : builtin_descriptors()) {
    if (wanted.count(d.id)) registry.register_converter(d);
  }
  Registry persisted;
  load_registry_file(persisted, config.registry_file());
  for (auto& d : persisted.list_converters()) {
    try {
      registry.register_converter(std::move(d));
    } catch (const Error& e) {
      if (e.code() != Errc::duplicate_id) throw;
    }
  }
}

}  // namespace migrado
