#include "migrado/registry.hpp"

#include <algorithm>
#include <charconv>

#include "migrado/error.hpp"
#include "migrado/negotiation.hpp"

namespace migrado {

std::string_view to_string(ConverterKind kind) noexcept {
  return kind == ConverterKind::builtin ? "builtin" : "external-command";
}

std::optional<ConverterKind> parse_converter_kind(std::string_view text) noexcept {
  if (text == "builtin") return ConverterKind::builtin;
  if (text == "external-command") return ConverterKind::external_command;
  return std::nullopt;
}

void ConverterDescriptor::validate() const {
  if (id.empty()) throw Error(Errc::invalid_descriptor, "converter id is empty");
  if (version.empty()) throw Error(Errc::invalid_descriptor, "converter " + id + " has no version");
  if (input == output && id != kIdentityConverterId) {
    throw Error(Errc::invalid_descriptor, "converter " + id + " maps " + input.to_string() + " to itself");
  }
  if (kind == ConverterKind::external_command) {
    if (command.empty() || command.front().empty()) {
      throw Error(Errc::invalid_descriptor, "external converter " + id + " has no command");
    }
  } else if (!command.empty()) {
    throw Error(Errc::invalid_descriptor, "builtin converter " + id + " must not carry a command");
  }
}

namespace {

std::vector<std::string_view> split_dots(std::string_view v) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto dot = v.find('.', start);
    parts.push_back(v.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

std::optional<unsigned long long> as_number(std::string_view s) {
  unsigned long long n = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return n;
}

}  // namespace

int compare_versions(std::string_view a, std::string_view b) {
  auto pa = split_dots(a);
  auto pb = split_dots(b);
  for (std::size_t i = 0; i < std::max(pa.size(), pb.size()); ++i) {
    std::string_view x = i < pa.size() ? pa[i] : "0";
    std::string_view y = i < pb.size() ? pb[i] : "0";
    auto nx = as_number(x);
    auto ny = as_number(y);
    int c = 0;
    if (nx && ny) {
      c = *nx < *ny ? -1 : (*nx > *ny ? 1 : 0);
    } else {
      c = x.compare(y);
      c = c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    if (c != 0) return c;
  }
  return 0;
}

std::optional<ConversionPlan> plan_conversion(std::span<const ConverterDescriptor> converters,
                                              const MediaType& source, const AcceptHeader& accept,
                                              const ObsolescencePolicy& policy) {
  const ConverterDescriptor* best = nullptr;
  QValue best_q;
  for (const auto& d : converters) {
    if (!d.accepts_input(source)) continue;
    QValue q = match_quality(d.output, accept, policy);
    if (q.is_zero()) continue;
    bool better = best == nullptr;
    if (!better) {
      if (q != best_q) {
        better = q > best_q;
      } else if (d.cost != best->cost) {
        better = d.cost < best->cost;
      } else {
        better = d.id < best->id;
      }
    }
    if (better) {
      best = &d;
      best_q = q;
    }
  }
  if (best == nullptr) return std::nullopt;
  return ConversionPlan{best->id, source, best->output, best_q};
}

Registry::Registry() : table_(std::make_shared<const Table>()) {}

Registry::Snapshot Registry::snapshot() const {
  std::lock_guard lock(pointer_mutex_);
  return table_;
}

void Registry::publish(Snapshot next) {
  std::lock_guard lock(pointer_mutex_);
  table_ = std::move(next);
}

Registry::Outcome Registry::register_converter(ConverterDescriptor d) {
  d.validate();
  std::lock_guard writer(writer_mutex_);
  auto next = std::make_shared<Table>(*snapshot());
  auto it = std::lower_bound(next->begin(), next->end(), d.id,
                             [](const ConverterDescriptor& e, const std::string& id) { return e.id < id; });
  Outcome outcome = Outcome::added;
  if (it != next->end() && it->id == d.id) {
    if (compare_versions(d.version, it->version) <= 0) {
      throw Error(Errc::duplicate_id, "converter " + d.id + " version " + d.version +
                                          " is not newer than registered " + it->version);
    }
    *it = std::move(d);
    outcome = Outcome::replaced;
  } else {
    next->insert(it, std::move(d));
  }
  publish(std::move(next));
  return outcome;
}

bool Registry::unregister(std::string_view id) {
  std::lock_guard writer(writer_mutex_);
  auto next = std::make_shared<Table>(*snapshot());
  auto it = std::find_if(next->begin(), next->end(), [&](const ConverterDescriptor& e) { return e.id == id; });
  if (it == next->end()) return false;
  next->erase(it);
  publish(std::move(next));
  return true;
}

std::optional<ConverterDescriptor> Registry::find(std::string_view id) const {
  auto table = snapshot();
  for (const auto& d : *table) {
    if (d.id == id) return d;
  }
  return std::nullopt;
}

}  // namespace migrado
