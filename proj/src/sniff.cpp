#include "migrado/sniff.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "migrado/kernels.hpp"
#include "text.hpp"

namespace migrado {

namespace {

bool starts_with(ByteView body, std::string_view magic) {
  return body.size() >= magic.size() && std::memcmp(body.data(), magic.data(), magic.size()) == 0;
}

bool starts_with_ci(ByteView body, std::string_view prefix) {
  if (body.size() < prefix.size()) return false;
  return text::iequals(std::string_view(reinterpret_cast<const char*>(body.data()), prefix.size()), prefix);
}

struct ExtensionEntry {
  std::string_view extension;
  std::string_view primary;
  std::string_view sub;
};

constexpr std::array<ExtensionEntry, 14> kExtensions{{
    {".gif", "image", "gif"},
    {".png", "image", "png"},
    {".jpg", "image", "jpeg"},
    {".jpeg", "image", "jpeg"},
    {".webp", "image", "webp"},
    {".svg", "image", "svg+xml"},
    {".html", "text", "html"},
    {".htm", "text", "html"},
    {".txt", "text", "plain"},
    {".css", "text", "css"},
    {".js", "text", "javascript"},
    {".json", "application", "json"},
    {".pdf", "application", "pdf"},
    {".xml", "application", "xml"},
}};

}  // namespace

std::optional<MediaType> sniff_media_type(ByteView body) {
  if (starts_with(body, "GIF87a") || starts_with(body, "GIF89a")) return MediaType("image", "gif");
  if (starts_with(body, "\x89PNG\r\n\x1a\n")) return MediaType("image", "png");

  ByteView rest = body;
  if (starts_with(rest, "\xEF\xBB\xBF")) rest = rest.subspan(3);
  while (!rest.empty() && (rest[0] == ' ' || rest[0] == '\t' || rest[0] == '\n' || rest[0] == '\r' || rest[0] == '\f')) {
    rest = rest.subspan(1);
  }
  if (starts_with_ci(rest, "<!DOCTYPE") || starts_with_ci(rest, "<html")) return MediaType("text", "html");

  if (!body.empty() && kernels::active().count_binary_bytes(body) == 0) return MediaType("text", "plain");
  return std::nullopt;
}

std::optional<MediaType> media_type_for_extension(std::string_view path) {
  auto slash = path.find_last_of("/\\");
  auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  auto dot = name.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto ext = text::to_lower(name.substr(dot));
  for (const auto& e : kExtensions) {
    if (e.extension == ext) return MediaType(e.primary, e.sub);
  }
  return std::nullopt;
}

std::string_view extension_for(const MediaType& type) {
  for (const auto& e : kExtensions) {
    if (e.primary == type.primary() && e.sub == type.sub()) return e.extension;
  }
  return ".bin";
}

}  // namespace migrado
