#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "migrado/common.hpp"
#include "migrado/fetch.hpp"
#include "migrado/media_type.hpp"

namespace migrado {

enum class ResourceSource { fetched, imported };

std::string_view to_string(ResourceSource source) noexcept;

/// One line of `manifest.jsonl`.
struct ManifestEntry {
  std::string url;
  std::string digest;
  MediaType media_type;
  Timestamp collected_at;
  ResourceSource source = ResourceSource::imported;
  std::uint64_t byte_length = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Exact manifest record, without the trailing newline:
/// {"url":...,"digest":...,"media_type":...,"collected_at":...,"source":...,"byte_length":N}
std::string manifest_line(const ManifestEntry& entry);
ManifestEntry parse_manifest_line(std::string_view line);

struct PreservedResource {
  std::string url;
  MediaType media_type;
  Bytes body;
  std::string digest;
  Timestamp collected_at;
  ResourceSource source = ResourceSource::imported;
};

struct VerifyReport {
  std::size_t total = 0;
  std::size_t ok = 0;
  std::vector<std::string> failed;  // sorted URLs
};

/// Content-addressed archive of collected resources.
///
/// Layout under the root directory:
///   objects/<first two hex digits>/<sha256>   body bytes
///   manifest.jsonl                            one record per URL, sorted by URL
///
/// Bodies are never deleted; re-ingesting a URL repoints its manifest entry.
/// The manifest is rewritten through a temporary file and a rename, so a
/// crash leaves either the old or the new manifest on disk.
class Store {
 public:
  /// Opens (creating if needed) the store at `root`. Throws
  /// Error(storage_failure) on I/O errors or an unreadable manifest.
  explicit Store(std::filesystem::path root);

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Throws InvalidUrl, EmptyBody or StorageFailure.
  std::string ingest_bytes(std::string_view url, const MediaType& media_type, ByteView body,
                           Timestamp collected_at, ResourceSource source = ResourceSource::imported);

  /// Reads and re-verifies the body. Throws Error(integrity_failure) when
  /// the bytes on disk no longer hash to the recorded digest.
  std::optional<PreservedResource> lookup(std::string_view url) const;

  std::optional<ManifestEntry> entry(std::string_view url) const;
  std::vector<ManifestEntry> entries() const;
  std::size_t size() const;

  VerifyReport verify() const;

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.jsonl"; }
  std::filesystem::path object_path(std::string_view digest) const;

 private:
  void write_object(const std::string& digest, ByteView body);
  void write_manifest(const std::map<std::string, ManifestEntry>& entries);
  Bytes read_verified(const ManifestEntry& entry) const;

  std::filesystem::path root_;
  std::mutex writer_mutex_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, ManifestEntry> entries_;
};

struct FetchPolicy {
  bool permission_stub = false;
  std::chrono::milliseconds timeout{10000};
};

/// GETs `url` and preserves the response body. The media type comes from
/// Content-Type, or from magic bytes when that header is missing or
/// `application/octet-stream`. With the permission stub on,
/// `<origin>/lockss-permission` must answer 200 first.
///
/// Throws FetchFailed, PermissionDenied, MissingContentType, plus the
/// ingest_bytes errors.
std::string ingest_fetch(Store& store, const Fetcher& fetcher, std::string_view url, const FetchPolicy& policy);

}  // namespace migrado
