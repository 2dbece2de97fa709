#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace migrado {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

using Timestamp = std::chrono::sys_seconds;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

/// ISO-8601 UTC with second precision, e.g. 2026-10-16T12:00:00Z.
std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view text);
Timestamp now_utc();

/// Lowercase hex SHA-256.
std::string sha256_hex(ByteView data);
inline std::string sha256_hex(std::string_view data) {
  return sha256_hex(ByteView(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

/// Lowercases scheme and host, drops the fragment, keeps the query and
/// leaves percent-encoding alone. An empty path becomes "/". Returns
/// nullopt for anything that is not `scheme://authority...`.
std::optional<std::string> canonicalize_url(std::string_view url);

/// `scheme://authority` of an already canonical URL.
std::string url_origin(std::string_view canonical_url);

}  // namespace migrado
