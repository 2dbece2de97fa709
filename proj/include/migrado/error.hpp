#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace migrado {

enum class Errc {
  malformed_media_type,
  malformed_accept,
  duplicate_id,
  invalid_descriptor,
  invalid_url,
  empty_body,
  storage_failure,
  fetch_failed,
  permission_denied,
  missing_content_type,
  integrity_failure,
  source_target_mismatch,
  malformed_input,
  conversion_failed,
  converter_crashed,
  converter_timeout,
  empty_output,
  malformed_manifest,
  digest_mismatch,
  invalid_config,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace migrado
