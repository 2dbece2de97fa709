#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "migrado/media_type.hpp"

namespace migrado {

enum class ConverterKind { builtin, external_command };

std::string_view to_string(ConverterKind kind) noexcept;
std::optional<ConverterKind> parse_converter_kind(std::string_view text) noexcept;

inline constexpr std::string_view kIdentityConverterId = "identity";

struct ConverterDescriptor {
  std::string id;
  MediaType input;
  MediaType output;
  std::uint32_t cost = 100;
  std::string version;
  ConverterKind kind = ConverterKind::builtin;
  std::vector<std::string> command;  // external_command only

  /// Throws Error(invalid_descriptor).
  void validate() const;

  /// True when this converter can take `source` as input: same essence and
  /// the descriptor's input parameters are a subset of the source's.
  bool accepts_input(const MediaType& source) const noexcept {
    return input.same_essence(source) && source.has_params(input.params());
  }

  friend bool operator==(const ConverterDescriptor&, const ConverterDescriptor&) = default;
};

struct ConversionPlan {
  std::string converter_id;
  MediaType source;
  MediaType target;
  QValue client_q;

  friend bool operator==(const ConversionPlan&, const ConversionPlan&) = default;
};

/// Orders dotted version strings numerically where both components are
/// numeric ("1.10" > "1.9"), lexically otherwise. Returns <0, 0, >0.
int compare_versions(std::string_view a, std::string_view b);

/// Best single-step conversion over `converters`: highest client q for the
/// output, then lowest cost, then smallest id. Converters whose output q is
/// zero are never chosen.
std::optional<ConversionPlan> plan_conversion(std::span<const ConverterDescriptor> converters,
                                              const MediaType& source, const AcceptHeader& accept,
                                              const ObsolescencePolicy& policy);

class Registry {
 public:
  using Table = std::vector<ConverterDescriptor>;  // sorted by id
  using Snapshot = std::shared_ptr<const Table>;

  enum class Outcome { added, replaced };

  Registry();

  /// Adds `d`, or replaces an existing entry with the same id when `d` has a
  /// strictly higher version. Throws Error(duplicate_id) or
  /// Error(invalid_descriptor).
  Outcome register_converter(ConverterDescriptor d);
  bool unregister(std::string_view id);

  /// Immutable view of the table; never waits on a writer doing real work.
  Snapshot snapshot() const;

  std::vector<ConverterDescriptor> list_converters() const { return *snapshot(); }
  std::optional<ConverterDescriptor> find(std::string_view id) const;

  std::optional<ConversionPlan> plan(const MediaType& source, const AcceptHeader& accept,
                                     const ObsolescencePolicy& policy) const {
    return plan_conversion(*snapshot(), source, accept, policy);
  }

 private:
  void publish(Snapshot next);

  std::mutex writer_mutex_;
  mutable std::mutex pointer_mutex_;
  Snapshot table_;
};

}  // namespace migrado
