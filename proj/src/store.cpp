#include "migrado/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "migrado/error.hpp"
#include "migrado/sniff.hpp"

namespace migrado {

namespace fs = std::filesystem;

std::string_view to_string(ResourceSource source) noexcept {
  return source == ResourceSource::fetched ? "fetched" : "imported";
}

std::string manifest_line(const ManifestEntry& entry) {
  nlohmann::ordered_json j;
  j["url"] = entry.url;
  j["digest"] = entry.digest;
  j["media_type"] = entry.media_type.to_string();
  j["collected_at"] = format_timestamp(entry.collected_at);
  j["source"] = to_string(entry.source);
  j["byte_length"] = entry.byte_length;
  return j.dump();
}

ManifestEntry parse_manifest_line(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    auto collected = parse_timestamp(j.at("collected_at").get<std::string>());
    if (!collected) throw Error(Errc::storage_failure, "bad collected_at in manifest");
    auto source = j.at("source").get<std::string>();
    if (source != "fetched" && source != "imported") throw Error(Errc::storage_failure, "bad source in manifest");
    return ManifestEntry{j.at("url").get<std::string>(),
                         j.at("digest").get<std::string>(),
                         MediaType::parse(j.at("media_type").get<std::string>()),
                         *collected,
                         source == "fetched" ? ResourceSource::fetched : ResourceSource::imported,
                         j.at("byte_length").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::storage_failure, std::string("unreadable manifest record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::storage_failure) throw;
    throw Error(Errc::storage_failure, std::string("unreadable manifest record: ") + e.what());
  }
}

namespace {

// Writes `data` to a sibling temporary file, syncs it, and renames it over `target`.
void write_file_atomically(const fs::path& target, std::string_view data) {
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::storage_failure, "cannot create " + tmp.string());
  std::size_t written = 0;
  while (written < data.size()) {
    ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fs::remove(tmp);
      throw Error(Errc::storage_failure, "cannot write " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    fs::remove(tmp);
    throw Error(Errc::storage_failure, "cannot sync " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(Errc::storage_failure, "cannot rename onto " + target.string() + ": " + ec.message());
  }
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "objects", ec);
  if (ec) throw Error(Errc::storage_failure, "cannot create store at " + root_.string() + ": " + ec.message());

  std::ifstream in(manifest_path());
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto entry = parse_manifest_line(line);
    auto url = entry.url;
    entries_.insert_or_assign(std::move(url), std::move(entry));
  }
}

fs::path Store::object_path(std::string_view digest) const {
  return root_ / "objects" / std::string(digest.substr(0, 2)) / std::string(digest);
}

void Store::write_object(const std::string& digest, ByteView body) {
  auto path = object_path(digest);
  std::error_code ec;
  if (fs::exists(path, ec) && fs::file_size(path, ec) == body.size()) {
    std::ifstream in(path, std::ios::binary);
    Bytes existing((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (sha256_hex(existing) == digest) return;
  }
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::storage_failure, "cannot create " + path.parent_path().string());
  write_file_atomically(path, std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
}

void Store::write_manifest(const std::map<std::string, ManifestEntry>& entries) {
  std::string data;
  for (const auto& [url, e] : entries) {
    data += manifest_line(e);
    data += '\n';
  }
  write_file_atomically(manifest_path(), data);
}

std::string Store::ingest_bytes(std::string_view url, const MediaType& media_type, ByteView body,
                                Timestamp collected_at, ResourceSource source) {
  auto canonical = canonicalize_url(url);
  if (!canonical) throw Error(Errc::invalid_url, "invalid URL: " + std::string(url));
  if (body.empty()) throw Error(Errc::empty_body, "refusing to ingest an empty body for " + *canonical);

  auto digest = sha256_hex(body);
  std::lock_guard writer(writer_mutex_);
  write_object(digest, body);

  auto next = entries_;  // only the writer mutates entries_, so reading it here is safe
  next.insert_or_assign(*canonical, ManifestEntry{*canonical, digest, media_type, collected_at, source, body.size()});
  write_manifest(next);

  std::unique_lock lock(map_mutex_);
  entries_ = std::move(next);
  return digest;
}

Bytes Store::read_verified(const ManifestEntry& entry) const {
  std::ifstream in(object_path(entry.digest), std::ios::binary);
  if (!in) throw Error(Errc::integrity_failure, "body missing for " + entry.url);
  Bytes body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (body.size() != entry.byte_length || sha256_hex(body) != entry.digest) {
    throw Error(Errc::integrity_failure, "stored body no longer matches digest for " + entry.url);
  }
  return body;
}

std::optional<ManifestEntry> Store::entry(std::string_view url) const {
  auto canonical = canonicalize_url(url);
  if (!canonical) return std::nullopt;
  std::shared_lock lock(map_mutex_);
  auto it = entries_.find(*canonical);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<PreservedResource> Store::lookup(std::string_view url) const {
  auto e = entry(url);
  if (!e) return std::nullopt;
  auto body = read_verified(*e);
  return PreservedResource{e->url, e->media_type, std::move(body), e->digest, e->collected_at, e->source};
}

std::vector<ManifestEntry> Store::entries() const {
  std::shared_lock lock(map_mutex_);
  std::vector<ManifestEntry> out;
  out.reserve(entries_.size());
  for (const auto& [url, e] : entries_) out.push_back(e);
  return out;
}

std::size_t Store::size() const {
  std::shared_lock lock(map_mutex_);
  return entries_.size();
}

VerifyReport Store::verify() const {
  VerifyReport report;
  for (const auto& e : entries()) {
    ++report.total;
    try {
      read_verified(e);
      ++report.ok;
    } catch (const Error&) {
      report.failed.push_back(e.url);
    }
  }
  return report;
}

std::string ingest_fetch(Store& store, const Fetcher& fetcher, std::string_view url, const FetchPolicy& policy) {
  auto canonical = canonicalize_url(url);
  if (!canonical) throw Error(Errc::invalid_url, "invalid URL: " + std::string(url));
  if (!canonical->starts_with("http://") && !canonical->starts_with("https://")) {
    throw Error(Errc::invalid_url, "only http and https URLs can be fetched: " + *canonical);
  }

  if (policy.permission_stub) {
    auto permission_url = url_origin(*canonical) + "/lockss-permission";
    auto permission = fetcher.get(permission_url, policy.timeout);
    if (permission.status != 200) {
      throw Error(Errc::permission_denied,
                  permission_url + " answered " + std::to_string(permission.status));
    }
  }

  auto response = fetcher.get(*canonical, policy.timeout);
  if (response.status != 200) {
    throw Error(Errc::fetch_failed, "GET " + *canonical + " answered " + std::to_string(response.status));
  }
  ByteView body(reinterpret_cast<const std::uint8_t*>(response.body.data()), response.body.size());

  std::optional<MediaType> media_type;
  if (auto header = response.header("Content-Type")) {
    try {
      media_type = MediaType::parse(*header);
    } catch (const Error&) {
    }
    if (media_type && media_type->essence() == "application/octet-stream") media_type.reset();
  }
  if (!media_type) media_type = sniff_media_type(body);
  if (!media_type) throw Error(Errc::missing_content_type, "cannot determine media type of " + *canonical);

  return store.ingest_bytes(*canonical, *media_type, body, now_utc(), ResourceSource::fetched);
}

}  // namespace migrado
