#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "migrado/converters.hpp"
#include "migrado/gateway.hpp"

namespace migrado {

/// Service configuration. The file form is a single JSON object with these
/// keys; unknown keys are rejected.
struct Config {
  std::string listen_address = "127.0.0.1:8080";
  std::string store_path = "store";
  std::vector<std::string> obsolete_types;
  bool upstream_mode = false;
  bool upstream_strict = false;
  std::uint32_t upstream_timeout_ms = 2000;
  std::uint64_t cache_bytes = 256ull * 1024 * 1024;
  std::uint32_t external_concurrency = 4;
  std::uint32_t converter_timeout_ms = 30000;
  bool strict_accept_parsing = false;
  bool permission_stub = false;
  std::vector<std::string> registry_urls;
  std::vector<std::string> builtin_converters{"gif2png", "text2html"};

  /// Throws Error(invalid_config).
  void validate() const;

  ObsolescencePolicy policy() const { return ObsolescencePolicy::from_strings(obsolete_types); }
  GatewayOptions gateway_options() const;
  RunnerOptions runner_options() const;
  std::pair<std::string, int> listen_endpoint() const;
  std::filesystem::path registry_file() const { return std::filesystem::path(store_path) / "registry.json"; }

  friend bool operator==(const Config&, const Config&) = default;
};

/// Throws Error(invalid_config) on bad JSON, wrong types or unknown keys.
Config parse_config(std::string_view json);
Config load_config_file(const std::filesystem::path& path);
std::string serialize_config(const Config& config);

/// Builtins named in `config.builtin_converters`, then the converters
/// persisted in the store's registry file.
void populate_registry(Registry& registry, const Config& config);

}  // namespace migrado
