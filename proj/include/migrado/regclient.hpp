#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "migrado/fetch.hpp"
#include "migrado/registry.hpp"

namespace migrado {

// Registry manifest, served as application/json:
//
//   {"version": 1,
//    "converters": [
//      {"id": "gif2png", "input": "image/gif", "output": "image/png", "cost": 100,
//       "version": "1.0", "kind": "external-command", "command": ["gif2png-cli"],
//       "sha256": "<hex digest of the canonical record>"}, ...]}
//
// The canonical record is the compact JSON object of the descriptor fields
// in the order id, input, output, cost, version, kind, command, with
// `command` present only for external-command converters.

std::string canonical_descriptor_json(const ConverterDescriptor& d);
std::string descriptor_digest(const ConverterDescriptor& d);

/// Pretty-printed manifest with a digest on every record.
std::string serialize_manifest(const std::vector<ConverterDescriptor>& converters, int version = 1);

struct SyncReport {
  std::size_t added = 0;
  std::size_t replaced = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;  // "<id or #index>: <reason>"
};

/// Registers every verifiable record from a manifest document. Bad records
/// are counted in `failed` and never stop the others. Throws
/// Error(malformed_manifest) when the document itself is unusable.
SyncReport apply_manifest(Registry& registry, std::string_view manifest_json);

/// Fetches `url` and applies it. Throws FetchFailed (including non-200
/// answers) or MalformedManifest.
SyncReport sync_registry(Registry& registry, const Fetcher& fetcher, std::string_view url,
                         std::chrono::milliseconds timeout = std::chrono::seconds(10));

/// Local persistence of synced converters, in manifest format.
void load_registry_file(Registry& registry, const std::filesystem::path& path);
void save_registry_file(const Registry& registry, const std::filesystem::path& path);

}  // namespace migrado
