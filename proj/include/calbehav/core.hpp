#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace calbehav {

// Errors --------------------------------------------------------------------

/// A caller broke a documented precondition (empty dataset, inverted window...).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Input files are unusable as a whole (missing CSV column, bad config).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Severity { Warning, Error };

/// A per-line complaint produced while ingesting a file. Ingestion keeps
/// going after a diagnostic; the offending block or row is skipped.
struct Diagnostic {
  std::size_t line = 0;
  Severity severity = Severity::Error;
  std::string message;
};

inline std::string to_string(const Diagnostic& d) {
  return (d.severity == Severity::Error ? "error" : "warning") +
         std::string(" (line ") + std::to_string(d.line) + "): " + d.message;
}

template <typename T>
struct ParseResult {
  std::vector<T> items;
  std::vector<Diagnostic> diagnostics;

  [[nodiscard]] bool has_errors() const {
    for (const auto& d : diagnostics)
      if (d.severity == Severity::Error) return true;
    return false;
  }
};

// Behavior ------------------------------------------------------------------

/// Response to an incoming call. Declaration order is the tie-break order
/// used when two classes are equally frequent.
enum class Behavior : std::uint8_t { Reject = 0, Accept = 1, Missed = 2 };

inline constexpr std::array<Behavior, 3> kBehaviors{Behavior::Reject, Behavior::Accept,
                                                    Behavior::Missed};

inline constexpr std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::Reject: return "Reject";
    case Behavior::Accept: return "Accept";
    case Behavior::Missed: return "Missed";
  }
  return "?";
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return out;
}

inline std::optional<Behavior> parse_behavior(std::string_view s) {
  const auto v = ascii_lower(s);
  if (v == "reject") return Behavior::Reject;
  if (v == "accept") return Behavior::Accept;
  if (v == "missed") return Behavior::Missed;
  return std::nullopt;
}

// Context attributes ----------------------------------------------------------

enum class Attribute : std::uint8_t { EventName = 0, EventType = 1, DayTime = 2, Relationship = 3 };

/// Fixed attribute order; also the information-gain tie-break order.
inline constexpr std::array<Attribute, 4> kAttributes{Attribute::EventName, Attribute::EventType,
                                                      Attribute::DayTime, Attribute::Relationship};

inline constexpr std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::EventName: return "event_name";
    case Attribute::EventType: return "event_type";
    case Attribute::DayTime: return "day_time";
    case Attribute::Relationship: return "relationship";
  }
  return "?";
}

inline std::optional<Attribute> parse_attribute(std::string_view s) {
  for (auto a : kAttributes)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

enum class EventType : std::uint8_t { Recurring, NonRecurring };

inline constexpr std::string_view to_string(EventType t) {
  return t == EventType::Recurring ? "Recurring" : "NonRecurring";
}

// Exact ratios ----------------------------------------------------------------

/// Non-negative rational kept unreduced so that counts survive round trips
/// (17/20 stays 17/20). Comparison is exact cross-multiplication.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  /// Integer percent, rounded half up.
  [[nodiscard]] std::uint64_t percent() const { return (200 * num + den) / (2 * den); }

  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) {
    return a.num * b.den <=> b.num * a.den;
  }
};

inline std::string to_string(const Ratio& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

/// Converts a user-facing fraction such as 0.8 into an exact ratio over 10^6,
/// so threshold tests never depend on binary floating point.
inline Ratio threshold_ratio(double fraction) {
  constexpr std::uint64_t kScale = 1'000'000;
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ContractViolation("confidence threshold must lie in (0, 1]");
  return Ratio{static_cast<std::uint64_t>(fraction * kScale + 0.5), kScale};
}

// Dates and times -------------------------------------------------------------

/// Wall-clock values in the user's single time zone. No zone conversion is
/// ever applied; sys_* types are used purely as naive calendar arithmetic.
using Date = std::chrono::sys_days;
using DateTime = std::chrono::sys_seconds;
using TimeOfDay = std::chrono::seconds;

inline constexpr std::array<std::string_view, 7> kWeekdayNames{
    "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"};
inline constexpr std::array<std::string_view, 7> kWeekdayCodes{"SU", "MO", "TU", "WE",
                                                               "TH", "FR", "SA"};

inline std::string_view weekday_name(std::chrono::weekday wd) { return kWeekdayNames[wd.c_encoding()]; }
inline std::string_view weekday_code(std::chrono::weekday wd) { return kWeekdayCodes[wd.c_encoding()]; }

inline std::optional<std::chrono::weekday> parse_weekday_code(std::string_view code) {
  for (unsigned i = 0; i < 7; ++i)
    if (kWeekdayCodes[i] == code) return std::chrono::weekday{i};
  return std::nullopt;
}

namespace detail {

template <typename Int>
bool parse_digits(std::string_view s, Int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline std::optional<Date> make_date(int y, unsigned m, unsigned d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::optional<TimeOfDay> make_time(int h, int m, int s) {
  if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59) return std::nullopt;
  return TimeOfDay{h * 3600 + m * 60 + s};
}

}  // namespace detail

/// YYYY-MM-DD
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!detail::parse_digits(s.substr(0, 4), y) || !detail::parse_digits(s.substr(5, 2), m) ||
      !detail::parse_digits(s.substr(8, 2), d))
    return std::nullopt;
  return detail::make_date(y, m, d);
}

/// YYYY-MM-DD hh:mm:ss
inline std::optional<DateTime> parse_datetime(std::string_view s) {
  if (s.size() != 19 || s[10] != ' ' || s[13] != ':' || s[16] != ':') return std::nullopt;
  const auto date = parse_date(s.substr(0, 10));
  int h = 0, m = 0, sec = 0;
  if (!date || !detail::parse_digits(s.substr(11, 2), h) ||
      !detail::parse_digits(s.substr(14, 2), m) || !detail::parse_digits(s.substr(17, 2), sec))
    return std::nullopt;
  const auto tod = detail::make_time(h, m, sec);
  if (!tod) return std::nullopt;
  return DateTime{*date} + *tod;
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// hh:mm, or hh:mm:ss when seconds are non-zero. 24:00 is allowed as an end time.
inline std::string format_time(TimeOfDay t) {
  const auto total = t.count();
  char buf[64];
  if (total % 60 == 0)
    std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(total / 3600),
                  static_cast<long long>(total / 60 % 60));
  else
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(total / 3600),
                  static_cast<long long>(total / 60 % 60), static_cast<long long>(total % 60));
  return buf;
}

inline std::string format_datetime(DateTime t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const auto tod = (t - day).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, " %02lld:%02lld:%02lld", static_cast<long long>(tod / 3600),
                static_cast<long long>(tod / 60 % 60), static_cast<long long>(tod % 60));
  return format_date(day) + buf;
}

inline Date date_of(DateTime t) { return std::chrono::floor<std::chrono::days>(t); }
inline TimeOfDay time_of(DateTime t) { return t - std::chrono::floor<std::chrono::days>(t); }

/// Closed date range [first, last].
struct DateRange {
  Date first;
  Date last;

  [[nodiscard]] bool contains(Date d) const { return first <= d && d <= last; }
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

/// Splits text into lines, accepting LF or CRLF terminators.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

}  // namespace calbehav
