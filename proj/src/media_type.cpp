#include "migrado/media_type.hpp"

#include <algorithm>

#include "migrado/error.hpp"
#include "text.hpp"

namespace migrado {

namespace {

using text::is_tchar;
using text::is_token;
using text::to_lower;
using text::trim_ows;

// Splits on `sep`, ignoring separators inside quoted strings.
std::vector<std::string_view> split_unquoted(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quoted) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

std::optional<std::string> unquote(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c == '\\') {
      if (i + 2 >= s.size()) return std::nullopt;
      c = s[++i];
    } else if (c == '"') {
      return std::nullopt;
    }
    auto u = static_cast<unsigned char>(c);
    if ((u < 0x20 && c != '\t') || u == 0x7f) return std::nullopt;
    out.push_back(c);
  }
  return out;
}

// name=value, value is a token or a quoted-string.
std::optional<MediaParam> parse_param(std::string_view seg) {
  auto eq = seg.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  auto name = seg.substr(0, eq);
  auto value = seg.substr(eq + 1);
  if (!is_token(name)) return std::nullopt;
  if (!value.empty() && value.front() == '"') {
    auto unq = unquote(value);
    if (!unq) return std::nullopt;
    return MediaParam{to_lower(name), std::move(*unq)};
  }
  if (!is_token(value)) return std::nullopt;
  return MediaParam{to_lower(name), std::string(value)};
}

struct TypePair {
  std::string_view primary;
  std::string_view sub;
};

std::optional<TypePair> split_type(std::string_view s) {
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  TypePair p{s.substr(0, slash), s.substr(slash + 1)};
  if (!is_token(p.primary) || !is_token(p.sub)) return std::nullopt;
  return p;
}

std::string quote_if_needed(const std::string& v) {
  if (is_token(v)) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string params_to_string(const MediaParams& params) {
  std::string out;
  for (const auto& p : params) {
    out += ";";
    out += p.name;
    out += "=";
    out += quote_if_needed(p.value);
  }
  return out;
}

MediaParams sorted(MediaParams p) {
  std::sort(p.begin(), p.end(), [](const MediaParam& a, const MediaParam& b) {
    return std::tie(a.name, a.value) < std::tie(b.name, b.value);
  });
  return p;
}

std::optional<MediaRange> parse_range(std::string_view element) {
  auto segs = split_unquoted(element, ';');
  auto pair = split_type(trim_ows(segs[0]));
  if (!pair) return std::nullopt;

  MediaRange range;
  if (pair->primary == "*") {
    if (pair->sub != "*") return std::nullopt;
    range.kind = MediaRange::Kind::any;
  } else if (pair->sub == "*") {
    range.kind = MediaRange::Kind::type_only;
    range.primary = to_lower(pair->primary);
  } else {
    range.kind = MediaRange::Kind::exact;
    range.primary = to_lower(pair->primary);
    range.sub = to_lower(pair->sub);
  }

  bool after_q = false;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    auto seg = trim_ows(segs[i]);
    if (seg.empty()) continue;
    auto param = parse_param(seg);
    if (!param) return std::nullopt;
    if (after_q) continue;  // accept-ext, ignored
    if (param->name == "q") {
      auto q = QValue::parse(param->value);
      if (!q) return std::nullopt;
      range.q = *q;
      after_q = true;
      continue;
    }
    range.params.push_back(std::move(*param));
  }
  return range;
}

}  // namespace

MediaType::MediaType(std::string_view primary, std::string_view sub, MediaParams params)
    : primary_(to_lower(primary)), sub_(to_lower(sub)), params_(std::move(params)) {
  if (!is_token(primary_) || !is_token(sub_) || primary_ == "*" || sub_ == "*") {
    throw Error(Errc::malformed_media_type,
                "malformed media type: " + std::string(primary) + "/" + std::string(sub));
  }
  for (auto& p : params_) {
    if (!is_token(p.name)) throw Error(Errc::malformed_media_type, "malformed parameter name: " + p.name);
    p.name = to_lower(p.name);
  }
}

MediaType MediaType::parse(std::string_view text) {
  auto segs = split_unquoted(text, ';');
  auto pair = split_type(trim_ows(segs[0]));
  if (!pair) throw Error(Errc::malformed_media_type, "malformed media type: " + std::string(text));
  MediaParams params;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    auto seg = trim_ows(segs[i]);
    if (seg.empty()) continue;
    auto param = parse_param(seg);
    if (!param) throw Error(Errc::malformed_media_type, "malformed parameter in: " + std::string(text));
    if (param->name == "q") continue;
    params.push_back(std::move(*param));
  }
  return MediaType(pair->primary, pair->sub, std::move(params));
}

std::string MediaType::to_string() const { return essence() + params_to_string(params_); }

bool MediaType::has_params(const MediaParams& subset) const noexcept {
  return std::all_of(subset.begin(), subset.end(), [this](const MediaParam& want) {
    return std::find(params_.begin(), params_.end(), want) != params_.end();
  });
}

bool operator==(const MediaType& a, const MediaType& b) {
  return a.same_essence(b) && sorted(a.params_) == sorted(b.params_);
}

std::strong_ordering operator<=>(const MediaType& a, const MediaType& b) {
  if (auto c = a.primary_ <=> b.primary_; c != 0) return c;
  if (auto c = a.sub_ <=> b.sub_; c != 0) return c;
  auto pa = sorted(a.params_);
  auto pb = sorted(b.params_);
  return std::lexicographical_compare_three_way(
      pa.begin(), pa.end(), pb.begin(), pb.end(), [](const MediaParam& x, const MediaParam& y) {
        if (auto c = x.name <=> y.name; c != 0) return c;
        return x.value <=> y.value;
      });
}

std::optional<QValue> QValue::parse(std::string_view text) {
  if (text.empty() || (text[0] != '0' && text[0] != '1')) return std::nullopt;
  unsigned whole = static_cast<unsigned>(text[0] - '0');
  unsigned frac = 0;
  if (text.size() > 1) {
    if (text[1] != '.' || text.size() > 5) return std::nullopt;
    unsigned scale = 100;
    for (std::size_t i = 2; i < text.size(); ++i, scale /= 10) {
      char c = text[i];
      if (c < '0' || c > '9') return std::nullopt;
      frac += static_cast<unsigned>(c - '0') * scale;
    }
  }
  unsigned millis = whole * 1000 + frac;
  if (millis > 1000) return std::nullopt;
  return QValue(static_cast<std::uint16_t>(millis));
}

std::string QValue::to_string() const {
  if (millis_ == 1000) return "1";
  if (millis_ == 0) return "0";
  std::string digits = std::to_string(1000 + millis_).substr(1);
  while (digits.back() == '0') digits.pop_back();
  return "0." + digits;
}

MediaRange MediaRange::any_range(QValue q) {
  MediaRange r;
  r.q = q;
  return r;
}

MediaRange MediaRange::type_only(std::string_view primary, QValue q) {
  MediaRange r;
  r.kind = Kind::type_only;
  r.primary = to_lower(primary);
  r.q = q;
  return r;
}

MediaRange MediaRange::exact(const MediaType& type, QValue q) {
  MediaRange r;
  r.kind = Kind::exact;
  r.primary = type.primary();
  r.sub = type.sub();
  r.params = type.params();
  r.q = q;
  return r;
}

int MediaRange::specificity() const noexcept {
  switch (kind) {
    case Kind::any: return 0;
    case Kind::type_only: return 1;
    case Kind::exact: return params.empty() ? 2 : 3;
  }
  return 0;
}

bool MediaRange::covers(const MediaType& type) const noexcept {
  switch (kind) {
    case Kind::any: break;
    case Kind::type_only:
      if (primary != type.primary()) return false;
      break;
    case Kind::exact:
      if (primary != type.primary() || sub != type.sub()) return false;
      break;
  }
  return type.has_params(params);
}

std::string MediaRange::to_string() const {
  std::string out;
  switch (kind) {
    case Kind::any: out = "*/*"; break;
    case Kind::type_only: out = primary + "/*"; break;
    case Kind::exact: out = primary + "/" + sub; break;
  }
  out += params_to_string(params);
  if (q != QValue::one()) out += ";q=" + q.to_string();
  return out;
}

AcceptHeader AcceptHeader::parse(std::optional<std::string_view> raw, AcceptParseMode mode) {
  if (!raw) return absent();
  std::vector<MediaRange> ranges;
  for (auto element : split_unquoted(*raw, ',')) {
    element = trim_ows(element);
    if (element.empty()) continue;
    auto range = parse_range(element);
    if (range) {
      ranges.push_back(std::move(*range));
    } else if (mode == AcceptParseMode::strict) {
      throw Error(Errc::malformed_accept, "malformed media range: " + std::string(element));
    }
  }
  return of(std::move(ranges));
}

const std::vector<MediaRange>& AcceptHeader::ranges() const {
  static const std::vector<MediaRange> none;
  return ranges_ ? *ranges_ : none;
}

std::string AcceptHeader::to_string() const {
  std::string out;
  for (const auto& r : ranges()) {
    if (!out.empty()) out += ", ";
    out += r.to_string();
  }
  return out;
}

ObsolescencePolicy::ObsolescencePolicy(const std::vector<MediaType>& types) {
  for (const auto& t : types) add(t);
}

ObsolescencePolicy ObsolescencePolicy::from_strings(const std::vector<std::string>& entries) {
  ObsolescencePolicy policy;
  for (const auto& e : entries) {
    auto type = MediaType::parse(e);
    if (!type.params().empty()) {
      throw Error(Errc::malformed_media_type, "obsolete type must be a bare type/subtype: " + e);
    }
    policy.add(type);
  }
  return policy;
}

}  // namespace migrado
