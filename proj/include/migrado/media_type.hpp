#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace migrado {

struct MediaParam {
  std::string name;   // lowercase
  std::string value;  // unquoted, case preserved

  friend bool operator==(const MediaParam&, const MediaParam&) = default;
};

using MediaParams = std::vector<MediaParam>;

/// A concrete `type/subtype`, optionally with parameters. Never a wildcard.
class MediaType {
 public:
  /// Validates both tokens and folds them to lowercase. Throws
  /// Error(malformed_media_type) on an empty or illegal token or on "*".
  MediaType(std::string_view primary, std::string_view sub, MediaParams params = {});

  /// Parses a header segment such as `text/html; level=1`. A `q`
  /// parameter, if present, is dropped.
  static MediaType parse(std::string_view text);

  const std::string& primary() const noexcept { return primary_; }
  const std::string& sub() const noexcept { return sub_; }
  const MediaParams& params() const noexcept { return params_; }

  /// `type/subtype` without parameters.
  std::string essence() const { return primary_ + '/' + sub_; }
  std::string to_string() const;

  bool same_essence(const MediaType& other) const noexcept {
    return primary_ == other.primary_ && sub_ == other.sub_;
  }

  /// True when every parameter in `subset` appears here with an equal value.
  bool has_params(const MediaParams& subset) const noexcept;

  /// Parameter order does not participate in equality.
  friend bool operator==(const MediaType& a, const MediaType& b);
  friend std::strong_ordering operator<=>(const MediaType& a, const MediaType& b);

 private:
  std::string primary_;
  std::string sub_;
  MediaParams params_;
};

inline MediaType parse_media_type(std::string_view text) { return MediaType::parse(text); }

/// Quality factor in thousandths, 0..1000.
class QValue {
 public:
  constexpr QValue() = default;
  static constexpr QValue from_millis(std::uint16_t millis) { return QValue(millis > 1000 ? 1000 : millis); }
  static constexpr QValue one() { return QValue(1000); }
  static constexpr QValue zero() { return QValue(0); }

  /// Accepts `0`, `0.xyz`, `1`, `1.000` with up to three fractional digits.
  static std::optional<QValue> parse(std::string_view text);

  constexpr std::uint16_t millis() const noexcept { return millis_; }
  constexpr bool is_zero() const noexcept { return millis_ == 0; }
  double as_double() const noexcept { return millis_ / 1000.0; }

  /// Shortest decimal form: "0", "1", "0.1", "0.125".
  std::string to_string() const;

  friend constexpr auto operator<=>(QValue, QValue) = default;

 private:
  constexpr explicit QValue(std::uint16_t millis) : millis_(millis) {}
  std::uint16_t millis_ = 0;
};

/// One element of an Accept header.
struct MediaRange {
  enum class Kind { any, type_only, exact };

  Kind kind = Kind::any;
  std::string primary;  // empty for any
  std::string sub;      // empty unless exact
  MediaParams params;
  QValue q = QValue::one();

  static MediaRange any_range(QValue q = QValue::one());
  static MediaRange type_only(std::string_view primary, QValue q = QValue::one());
  static MediaRange exact(const MediaType& type, QValue q = QValue::one());

  /// 3 = exact with params, 2 = exact, 1 = type/*, 0 = */*.
  int specificity() const noexcept;

  /// Pattern and parameter match only; obsolescence is applied by the matcher.
  bool covers(const MediaType& type) const noexcept;

  std::string to_string() const;
};

enum class AcceptParseMode { lenient, strict };

/// The Accept header of a request. Absent (no header) and empty (header
/// present, no ranges) are distinct states.
class AcceptHeader {
 public:
  static AcceptHeader absent() { return AcceptHeader(); }
  static AcceptHeader of(std::vector<MediaRange> ranges) { return AcceptHeader(std::move(ranges)); }

  /// Lenient mode drops malformed ranges; strict mode throws
  /// Error(malformed_accept) on the first one.
  static AcceptHeader parse(std::optional<std::string_view> raw,
                            AcceptParseMode mode = AcceptParseMode::lenient);

  bool is_absent() const noexcept { return !ranges_.has_value(); }
  const std::vector<MediaRange>& ranges() const;

  std::string to_string() const;

 private:
  AcceptHeader() = default;
  explicit AcceptHeader(std::vector<MediaRange> ranges) : ranges_(std::move(ranges)) {}

  std::optional<std::vector<MediaRange>> ranges_;
};

inline AcceptHeader parse_accept(std::optional<std::string_view> raw,
                                 AcceptParseMode mode = AcceptParseMode::lenient) {
  return AcceptHeader::parse(raw, mode);
}

/// Server-side list of formats that no longer match wildcard ranges.
class ObsolescencePolicy {
 public:
  ObsolescencePolicy() = default;
  explicit ObsolescencePolicy(const std::vector<MediaType>& types);

  /// Each entry must be an exact `type/subtype`; throws Error(malformed_media_type).
  static ObsolescencePolicy from_strings(const std::vector<std::string>& entries);

  void add(const MediaType& type) { essences_.insert(type.essence()); }
  bool contains(const MediaType& type) const { return essences_.count(type.essence()) != 0; }
  bool empty() const noexcept { return essences_.empty(); }
  std::vector<std::string> entries() const { return {essences_.begin(), essences_.end()}; }

 private:
  std::set<std::string> essences_;
};

}  // namespace migrado
