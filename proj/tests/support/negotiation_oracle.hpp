#pragma once

// Reference models for negotiation tests. They work on plain structs and
// strings and share no code with the library's parser or matcher.

#include <algorithm>
#include <cctype>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace migrado::testing {

using ParamList = std::vector<std::pair<std::string, std::string>>;

struct RefType {
  std::string primary;
  std::string sub;
  ParamList params;

  std::string essence() const { return primary + "/" + sub; }
  std::string str() const {
    std::string s = essence();
    for (const auto& [k, v] : params) s += ";" + k + "=" + v;
    return s;
  }
};

struct RefRange {
  enum Kind { any = 0, type_only = 1, exact = 2 };
  Kind kind = any;
  std::string primary;
  std::string sub;
  ParamList params;
  int q_millis = 1000;
  bool explicit_q = false;
};

inline std::string q_text(int millis) {
  if (millis == 1000) return "1";
  if (millis == 0) return "0";
  std::string d = std::to_string(1000 + millis).substr(1);
  while (d.back() == '0') d.pop_back();
  return "0." + d;
}

inline std::string render(const RefRange& r) {
  std::string s = r.kind == RefRange::any ? "*/*" : r.kind == RefRange::type_only ? r.primary + "/*" : r.primary + "/" + r.sub;
  for (const auto& [k, v] : r.params) s += ";" + k + "=" + v;
  if (r.explicit_q || r.q_millis != 1000) s += ";q=" + q_text(r.q_millis);
  return s;
}

inline std::string render(const std::vector<RefRange>& ranges) {
  std::string s;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (i) s += ", ";
    s += render(ranges[i]);
  }
  return s;
}

/// Brute force: score every range, then pick the highest specificity, earliest
/// first. An exact covering range with q=0 vetoes. Obsolete types ignore
/// wildcard ranges.
inline int reference_quality(const RefType& t, const std::optional<std::vector<RefRange>>& header,
                             const std::set<std::string>& obsolete) {
  if (!header) return 1000;
  struct Scored {
    int specificity;
    std::size_t index;
    int q;
  };
  std::vector<Scored> scored;
  const bool is_obsolete = obsolete.count(t.essence()) > 0;
  for (std::size_t i = 0; i < header->size(); ++i) {
    const auto& r = (*header)[i];
    bool pattern = r.kind == RefRange::any || (r.kind == RefRange::type_only && r.primary == t.primary) ||
                   (r.kind == RefRange::exact && r.primary == t.primary && r.sub == t.sub);
    bool params_ok = true;
    for (const auto& p : r.params) {
      params_ok = params_ok && std::find(t.params.begin(), t.params.end(), p) != t.params.end();
    }
    if (!pattern || !params_ok) continue;
    if (r.kind == RefRange::exact && r.q_millis == 0) return 0;
    if (r.kind != RefRange::exact && is_obsolete) continue;
    int spec = r.kind == RefRange::any ? 0 : r.kind == RefRange::type_only ? 1 : (r.params.empty() ? 2 : 3);
    scored.push_back({spec, i, r.q_millis});
  }
  if (scored.empty()) return 0;
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.specificity != b.specificity ? a.specificity > b.specificity : a.index < b.index;
  });
  return scored.front().q;
}

/// The ten-type universe used by the randomized suites.
inline std::vector<RefType> type_universe() {
  return {
      {"image", "gif", {}},        {"image", "png", {}},        {"image", "jpeg", {}},
      {"image", "webp", {}},       {"text", "plain", {}},       {"text", "html", {}},
      {"text", "html", {{"level", "1"}}}, {"application", "pdf", {}}, {"application", "json", {}},
      {"video", "mp4", {}},
  };
}

inline int random_q(std::mt19937_64& rng) {
  static const int common[] = {0, 100, 500, 700, 800, 900, 1000};
  if (rng() % 3 == 0) return static_cast<int>(rng() % 1001);
  return common[rng() % 7];
}

inline RefRange random_range(std::mt19937_64& rng, const std::vector<RefType>& universe) {
  static const char* primaries[] = {"image", "text", "application", "video", "audio"};
  RefRange r;
  switch (rng() % 5) {
    case 0:
      r.kind = RefRange::any;
      break;
    case 1:
      r.kind = RefRange::type_only;
      r.primary = primaries[rng() % 5];
      break;
    default: {
      const auto& t = universe[rng() % universe.size()];
      r.kind = RefRange::exact;
      r.primary = t.primary;
      r.sub = t.sub;
      if (rng() % 4 == 0) r.params = t.params.empty() ? ParamList{{"level", "2"}} : t.params;
      break;
    }
  }
  r.q_millis = random_q(rng);
  r.explicit_q = rng() % 2 == 0;
  return r;
}

inline std::vector<RefRange> random_header(std::mt19937_64& rng, const std::vector<RefType>& universe,
                                           std::size_t max_ranges = 6) {
  std::vector<RefRange> ranges(rng() % (max_ranges + 1));
  for (auto& r : ranges) r = random_range(rng, universe);
  return ranges;
}

// ---------------------------------------------------------------------------
// Reference Accept / media-type parser: a character-level recursive descent
// over the RFC 7231 grammar.
//   Accept       = #( media-range [ accept-params ] )
//   media-range  = ( "*/*" / ( type "/" "*" ) / ( type "/" subtype ) ) *( OWS ";" OWS parameter )
//   accept-params = weight *( accept-ext )
//   weight       = OWS ";" OWS "q=" qvalue
//   parameter    = token "=" ( token / quoted-string )

struct RefParsed {
  std::string primary;
  std::string sub;
  ParamList params;  // names lowercased, q and accept-ext excluded
  int q_millis = 1000;
};

class RefParser {
 public:
  explicit RefParser(std::string s) : s_(std::move(s)) {}

  // nullopt when the element is malformed.
  std::optional<RefParsed> element() {
    RefParsed out;
    if (!token(out.primary)) return std::nullopt;
    if (!eat('/')) return std::nullopt;
    if (!token(out.sub)) return std::nullopt;
    lower(out.primary);
    lower(out.sub);
    if (out.primary == "*" && out.sub != "*") return std::nullopt;
    bool after_q = false;
    for (;;) {
      ows();
      if (!eat(';')) break;
      ows();
      if (at_end() || peek() == ',' || peek() == ';') continue;  // empty parameter
      std::string name, value;
      if (!token(name) || !eat('=')) return std::nullopt;
      if (!at_end() && peek() == '"') {
        if (!quoted(value)) return std::nullopt;
      } else if (!token(value)) {
        return std::nullopt;
      }
      lower(name);
      if (after_q) continue;
      if (name == "q") {
        auto q = qvalue(value);
        if (!q) return std::nullopt;
        out.q_millis = *q;
        after_q = true;
      } else {
        out.params.emplace_back(name, value);
      }
    }
    ows();
    if (!at_end()) return std::nullopt;
    return out;
  }

  static std::optional<int> qvalue(const std::string& v) {
    if (v == "0" || v == "1") return v == "1" ? 1000 : 0;
    if (v.size() < 2 || v.size() > 5 || v[1] != '.') return std::nullopt;
    if (v[0] != '0' && v[0] != '1') return std::nullopt;
    int frac = 0, scale = 100;
    for (std::size_t i = 2; i < v.size(); ++i, scale /= 10) {
      if (!std::isdigit(static_cast<unsigned char>(v[i]))) return std::nullopt;
      if (v[0] == '1' && v[i] != '0') return std::nullopt;
      frac += (v[i] - '0') * scale;
    }
    return (v[0] - '0') * 1000 + frac;
  }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  bool eat(char c) {
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void ows() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  static bool tchar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string("!#$%&'*+-.^_`|~").find(c) != std::string::npos;
  }
  bool token(std::string& out) {
    std::size_t start = pos_;
    while (!at_end() && tchar(peek())) ++pos_;
    out = s_.substr(start, pos_ - start);
    return !out.empty();
  }
  bool quoted(std::string& out) {
    if (!eat('"')) return false;
    while (!at_end()) {
      char c = s_[pos_++];
      if (c == '"') return true;
      if (c == '\\') {
        if (at_end()) return false;
        c = s_[pos_++];
      }
      out.push_back(c);
    }
    return false;
  }
  static void lower(std::string& s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }

  std::string s_;
  std::size_t pos_ = 0;
};

/// Splits on commas outside quoted strings, then parses each non-empty element.
inline std::vector<std::optional<RefParsed>> reference_parse_accept(const std::string& header) {
  std::vector<std::string> elements;
  std::string cur;
  bool q = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    char c = header[i];
    if (q && c == '\\' && i + 1 < header.size()) {
      cur += c;
      cur += header[++i];
      continue;
    }
    if (c == '"') q = !q;
    if (c == ',' && !q) {
      elements.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  elements.push_back(cur);
  std::vector<std::optional<RefParsed>> out;
  for (auto& e : elements) {
    std::size_t a = e.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = e.find_last_not_of(" \t");
    out.push_back(RefParser(e.substr(a, b - a + 1)).element());
  }
  return out;
}

}  // namespace migrado::testing
