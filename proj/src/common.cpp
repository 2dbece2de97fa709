#include "migrado/common.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <ctime>
#include <memory>

#include "migrado/error.hpp"
#include "text.hpp"

namespace migrado {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_media_type: return "MalformedMediaType";
    case Errc::malformed_accept: return "MalformedAccept";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::invalid_descriptor: return "InvalidDescriptor";
    case Errc::invalid_url: return "InvalidUrl";
    case Errc::empty_body: return "EmptyBody";
    case Errc::storage_failure: return "StorageFailure";
    case Errc::fetch_failed: return "FetchFailed";
    case Errc::permission_denied: return "PermissionDenied";
    case Errc::missing_content_type: return "MissingContentType";
    case Errc::integrity_failure: return "IntegrityFailure";
    case Errc::source_target_mismatch: return "SourceTargetMismatch";
    case Errc::malformed_input: return "MalformedInput";
    case Errc::conversion_failed: return "ConversionFailed";
    case Errc::converter_crashed: return "ConverterCrashed";
    case Errc::converter_timeout: return "ConverterTimeout";
    case Errc::empty_output: return "EmptyOutput";
    case Errc::malformed_manifest: return "MalformedManifest";
    case Errc::digest_mismatch: return "DigestMismatch";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

std::string format_timestamp(Timestamp t) {
  std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), s = num(17, 2);
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year(*y), std::chrono::month(static_cast<unsigned>(*mo)),
                                  std::chrono::day(static_cast<unsigned>(*d))};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 60) return std::nullopt;
  return std::chrono::sys_days(ymd) + std::chrono::hours(*h) + std::chrono::minutes(*mi) +
         std::chrono::seconds(*s);
}

Timestamp now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

std::string sha256_hex(ByteView data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::storage_failure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::optional<std::string> canonicalize_url(std::string_view url) {
  for (char c : url) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7F) return std::nullopt;
  }
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  auto scheme = url.substr(0, sep);
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!is_alpha(scheme[0])) return std::nullopt;
  for (char c : scheme) {
    if (!is_alpha(c) && !(c >= '0' && c <= '9') && c != '+' && c != '-' && c != '.') return std::nullopt;
  }
  auto rest = url.substr(sep + 3);
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  auto auth_end = rest.find_first_of("/?");
  auto authority = rest.substr(0, auth_end);
  auto tail = auth_end == std::string_view::npos ? std::string_view() : rest.substr(auth_end);
  if (authority.empty()) return std::nullopt;

  // Only the host part (after any userinfo) is case-insensitive.
  std::string auth(authority);
  auto at = auth.rfind('@');
  std::size_t host_start = at == std::string::npos ? 0 : at + 1;
  if (host_start >= auth.size() || auth[host_start] == ':') return std::nullopt;
  for (std::size_t i = host_start; i < auth.size(); ++i) auth[i] = text::lower_ascii(auth[i]);

  std::string out = text::to_lower(scheme) + "://" + auth;
  if (tail.empty() || tail.front() == '?') out += '/';
  out += tail;
  return out;
}

std::string url_origin(std::string_view canonical_url) {
  auto sep = canonical_url.find("://");
  if (sep == std::string_view::npos) return std::string(canonical_url);
  auto end = canonical_url.find_first_of("/?", sep + 3);
  return std::string(canonical_url.substr(0, end));
}

}  // namespace migrado
