#pragma once

#include <optional>
#include <string_view>

#include "migrado/common.hpp"
#include "migrado/media_type.hpp"

namespace migrado {

/// Magic-byte detection: GIF87a/GIF89a, the PNG signature, a leading
/// `<!DOCTYPE` or `<html` (case-insensitive, after whitespace or a BOM), and
/// finally plain text when no binary control bytes are present. Returns
/// nullopt for anything else.
std::optional<MediaType> sniff_media_type(ByteView body);

/// Media type by file extension, for the handful of web formats we know.
std::optional<MediaType> media_type_for_extension(std::string_view path);

/// Preferred file extension (with dot) for a media type, or ".bin".
std::string_view extension_for(const MediaType& type);

}  // namespace migrado
