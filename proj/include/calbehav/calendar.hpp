#pragma once

// Restricted iCalendar reader: VEVENT blocks with DTSTART, DTEND, SUMMARY,
// RRULE (FREQ/INTERVAL/BYDAY/COUNT/UNTIL), UID, STATUS and LOCATION.
// TZID is carried as an opaque label; everything is compared as local
// wall-clock time.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calbehav/core.hpp"

namespace calbehav {

enum class Frequency { Daily, Weekly, Monthly };

inline constexpr std::string_view to_string(Frequency f) {
  switch (f) {
    case Frequency::Daily: return "DAILY";
    case Frequency::Weekly: return "WEEKLY";
    case Frequency::Monthly: return "MONTHLY";
  }
  return "?";
}

struct RecurrenceSpec {
  Frequency frequency = Frequency::Weekly;
  unsigned interval = 1;
  /// Empty means "not given". Kept in Monday-first order without duplicates.
  std::vector<std::chrono::weekday> by_day;
  std::optional<unsigned> count;
  std::optional<DateTime> until;
  bool until_is_date = false;

  friend bool operator==(const RecurrenceSpec&, const RecurrenceSpec&) = default;
};

struct CalendarEvent {
  std::string uid;
  std::string name;
  DateTime start{};
  DateTime end{};
  std::string start_tzid;
  std::string end_tzid;
  bool all_day = false;
  std::optional<RecurrenceSpec> recurrence;
  std::string status;
  std::optional<std::string> location;

  [[nodiscard]] EventType type() const {
    return recurrence ? EventType::Recurring : EventType::NonRecurring;
  }

  friend bool operator==(const CalendarEvent&, const CalendarEvent&) = default;
};

struct EventOccurrence {
  std::string event_uid;
  std::string event_name;
  Date date{};
  TimeOfDay start_time{};
  TimeOfDay end_time{};
  EventType event_type = EventType::NonRecurring;

  [[nodiscard]] DateTime start() const { return DateTime{date} + start_time; }
  [[nodiscard]] DateTime end() const { return DateTime{date} + end_time; }

  friend bool operator==(const EventOccurrence&, const EventOccurrence&) = default;
};

namespace ical_detail {

struct ContentLine {
  std::size_t line = 0;
  std::string name;
  std::map<std::string, std::string> params;
  std::string value;
};

struct LogicalLine {
  std::size_t line;
  std::string text;
};

inline std::vector<LogicalLine> unfold(std::string_view text) {
  std::vector<LogicalLine> out;
  std::size_t number = 0;
  for (auto raw : split_lines(text)) {
    ++number;
    if (!raw.empty() && (raw.front() == ' ' || raw.front() == '\t') && !out.empty()) {
      out.back().text.append(raw.substr(1));
      continue;
    }
    out.push_back({number, std::string(raw)});
  }
  return out;
}

inline std::optional<ContentLine> split_content_line(const LogicalLine& l) {
  ContentLine cl;
  cl.line = l.line;
  bool quoted = false;
  std::size_t colon = std::string::npos;
  for (std::size_t i = 0; i < l.text.size(); ++i) {
    if (l.text[i] == '"') quoted = !quoted;
    if (l.text[i] == ':' && !quoted) {
      colon = i;
      break;
    }
  }
  if (colon == std::string::npos) return std::nullopt;
  std::string_view head(l.text.data(), colon);
  cl.value = l.text.substr(colon + 1);

  auto semi = head.find(';');
  cl.name = ascii_upper(head.substr(0, semi));
  while (semi != std::string_view::npos) {
    auto next = head.find(';', semi + 1);
    auto param = head.substr(semi + 1, next == std::string_view::npos ? next : next - semi - 1);
    auto eq = param.find('=');
    if (eq != std::string_view::npos) {
      std::string key = ascii_upper(param.substr(0, eq));
      std::string val(param.substr(eq + 1));
      if (val.size() >= 2 && val.front() == '"' && val.back() == '"') val = val.substr(1, val.size() - 2);
      cl.params[key] = val;
    }
    semi = next;
  }
  return cl;
}

inline std::string unescape_text(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      const char n = v[++i];
      out.push_back(n == 'n' || n == 'N' ? '\n' : n);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

inline std::string escape_text(std::string_view v) {
  std::string out;
  for (char c : v) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ';': out += "\\;"; break;
      case ',': out += "\\,"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct IcsDateTime {
  DateTime value{};
  bool date_only = false;
  bool utc = false;
};

/// 20160602T080000, 20160602T080000Z or 20160602.
inline std::optional<IcsDateTime> parse_ics_datetime(std::string_view s) {
  IcsDateTime out;
  if (s.size() == 8) {
    out.date_only = true;
  } else if (s.size() == 15 || (s.size() == 16 && s.back() == 'Z')) {
    if (s[8] != 'T') return std::nullopt;
    out.utc = s.size() == 16;
  } else {
    return std::nullopt;
  }
  int y = 0;
  unsigned m = 0, d = 0;
  if (!detail::parse_digits(s.substr(0, 4), y) || !detail::parse_digits(s.substr(4, 2), m) ||
      !detail::parse_digits(s.substr(6, 2), d))
    return std::nullopt;
  auto date = detail::make_date(y, m, d);
  if (!date) return std::nullopt;
  out.value = DateTime{*date};
  if (!out.date_only) {
    int hh = 0, mm = 0, ss = 0;
    if (!detail::parse_digits(s.substr(9, 2), hh) || !detail::parse_digits(s.substr(11, 2), mm) ||
        !detail::parse_digits(s.substr(13, 2), ss))
      return std::nullopt;
    auto tod = detail::make_time(hh, mm, ss);
    if (!tod) return std::nullopt;
    out.value += *tod;
  }
  return out;
}

inline std::string format_ics_date(Date d) {
  auto s = format_date(d);
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  return s;
}

inline std::string format_ics_datetime(DateTime t) {
  const auto tod = time_of(t).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "T%02lld%02lld%02lld", static_cast<long long>(tod / 3600),
                static_cast<long long>(tod / 60 % 60), static_cast<long long>(tod % 60));
  return format_ics_date(date_of(t)) + buf;
}

inline unsigned iso_index(std::chrono::weekday wd) { return wd.iso_encoding() - 1; }

inline void normalize_by_day(std::vector<std::chrono::weekday>& days) {
  std::sort(days.begin(), days.end(),
            [](auto a, auto b) { return iso_index(a) < iso_index(b); });
  days.erase(std::unique(days.begin(), days.end()), days.end());
}

/// Returns an error message, or nullopt on success.
inline std::optional<std::string> parse_rrule(std::string_view value, RecurrenceSpec& out) {
  std::optional<Frequency> freq;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    auto next = value.find(';', pos);
    if (next == std::string_view::npos) next = value.size();
    auto part = value.substr(pos, next - pos);
    pos = next + 1;
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string_view::npos) return "RRULE part without '=': " + std::string(part);
    auto key = part.substr(0, eq);
    auto val = part.substr(eq + 1);
    if (key == "FREQ") {
      if (val == "DAILY") freq = Frequency::Daily;
      else if (val == "WEEKLY") freq = Frequency::Weekly;
      else if (val == "MONTHLY") freq = Frequency::Monthly;
      else return "unsupported recurrence FREQ=" + std::string(val);
    } else if (key == "INTERVAL") {
      if (!detail::parse_digits(val, out.interval) || out.interval == 0)
        return "INTERVAL must be a positive integer";
    } else if (key == "BYDAY") {
      std::size_t p = 0;
      while (p <= val.size()) {
        auto n = val.find(',', p);
        if (n == std::string_view::npos) n = val.size();
        auto code = val.substr(p, n - p);
        p = n + 1;
        auto wd = parse_weekday_code(code);
        if (!wd) return "unsupported BYDAY entry '" + std::string(code) + "'";
        out.by_day.push_back(*wd);
      }
      if (out.by_day.empty()) return "empty BYDAY";
    } else if (key == "COUNT") {
      unsigned c = 0;
      if (!detail::parse_digits(val, c) || c == 0) return "COUNT must be a positive integer";
      out.count = c;
    } else if (key == "UNTIL") {
      auto dt = parse_ics_datetime(val);
      if (!dt) return "malformed UNTIL '" + std::string(val) + "'";
      out.until = dt->date_only ? dt->value + std::chrono::hours{24} - std::chrono::seconds{1}
                                : dt->value;
      out.until_is_date = dt->date_only;
    } else if (key == "WKST") {
      if (val != "MO") return "unsupported WKST=" + std::string(val);
    } else {
      return "unsupported recurrence part " + std::string(key);
    }
  }
  if (!freq) return "RRULE without FREQ";
  if (out.count && out.until) return "RRULE with both COUNT and UNTIL";
  out.frequency = *freq;
  normalize_by_day(out.by_day);
  return std::nullopt;
}

inline std::string format_rrule(const RecurrenceSpec& r) {
  std::string s = "FREQ=" + std::string(to_string(r.frequency));
  if (r.interval != 1) s += ";INTERVAL=" + std::to_string(r.interval);
  if (!r.by_day.empty()) {
    s += ";BYDAY=";
    for (std::size_t i = 0; i < r.by_day.size(); ++i) {
      if (i) s += ',';
      s += weekday_code(r.by_day[i]);
    }
  }
  if (r.count) s += ";COUNT=" + std::to_string(*r.count);
  if (r.until)
    s += ";UNTIL=" + (r.until_is_date ? format_ics_date(date_of(*r.until))
                                      : format_ics_datetime(*r.until));
  return s;
}

/// Folds a content line at 75 octets without splitting a UTF-8 sequence.
inline void append_folded(std::string& out, std::string_view line) {
  constexpr std::size_t kLimit = 75;
  bool first = true;
  while (!line.empty()) {
    std::size_t limit = first ? kLimit : kLimit - 1;
    std::size_t cut = std::min(limit, line.size());
    while (cut < line.size() && cut > 0 && (static_cast<unsigned char>(line[cut]) & 0xC0) == 0x80)
      --cut;
    if (!first) out += ' ';
    out.append(line.substr(0, cut));
    out += "\r\n";
    line.remove_prefix(cut);
    first = false;
  }
}

struct BlockBuilder {
  std::size_t begin_line = 0;
  std::vector<ContentLine> props;
};

inline std::optional<std::string> build_event(const BlockBuilder& block, CalendarEvent& ev) {
  const ContentLine* dtstart = nullptr;
  const ContentLine* dtend = nullptr;
  const ContentLine* summary = nullptr;
  const ContentLine* rrule = nullptr;
  for (const auto& p : block.props) {
    if (p.name == "DTSTART") dtstart = &p;
    else if (p.name == "DTEND") dtend = &p;
    else if (p.name == "SUMMARY") summary = &p;
    else if (p.name == "RRULE") rrule = &p;
    else if (p.name == "UID") ev.uid = p.value;
    else if (p.name == "STATUS") ev.status = p.value;
    else if (p.name == "LOCATION") ev.location = unescape_text(p.value);
  }
  if (!dtstart) return "missing required property DTSTART";
  if (!dtend) return "missing required property DTEND";
  if (!summary) return "missing required property SUMMARY";

  ev.name = trim(unescape_text(summary->value));
  if (ev.name.empty()) return "empty SUMMARY at line " + std::to_string(summary->line);

  auto start = parse_ics_datetime(dtstart->value);
  if (!start) return "malformed DTSTART at line " + std::to_string(dtstart->line);
  auto end = parse_ics_datetime(dtend->value);
  if (!end) return "malformed DTEND at line " + std::to_string(dtend->line);
  auto tzid = [](const ContentLine& cl, const IcsDateTime& dt) -> std::string {
    if (auto it = cl.params.find("TZID"); it != cl.params.end()) return it->second;
    return dt.utc ? "UTC" : "";
  };
  ev.start = start->value;
  ev.end = end->value;
  ev.start_tzid = tzid(*dtstart, *start);
  ev.end_tzid = tzid(*dtend, *end);
  ev.all_day = start->date_only;
  if (ev.end <= ev.start) return "DTEND is not after DTSTART at line " + std::to_string(dtend->line);

  if (rrule) {
    RecurrenceSpec spec;
    if (auto err = parse_rrule(rrule->value, spec))
      return *err + " at line " + std::to_string(rrule->line);
    ev.recurrence = std::move(spec);
  }
  return std::nullopt;
}

}  // namespace ical_detail

/// Reads every well-formed VEVENT, in file order. Malformed blocks are
/// skipped with a diagnostic naming the offending line.
inline ParseResult<CalendarEvent> parse_icalendar(std::string_view text) {
  using namespace ical_detail;
  ParseResult<CalendarEvent> result;
  std::optional<BlockBuilder> block;
  int nested = 0;

  auto finish = [&](const BlockBuilder& b) {
    CalendarEvent ev;
    if (auto err = build_event(b, ev)) {
      result.diagnostics.push_back(
          {b.begin_line, Severity::Error, "VEVENT starting at line " + std::to_string(b.begin_line) + ": " + *err});
      return;
    }
    if (ev.uid.empty()) ev.uid = "event-line-" + std::to_string(b.begin_line);
    result.items.push_back(std::move(ev));
  };

  for (const auto& logical : unfold(text)) {
    if (trim(logical.text).empty()) continue;
    auto cl = split_content_line(logical);
    if (!cl) {
      if (block)
        result.diagnostics.push_back({logical.line, Severity::Warning,
                                      "ignoring line without ':' inside VEVENT"});
      continue;
    }
    const auto upper_value = ascii_upper(trim(cl->value));
    if (cl->name == "BEGIN") {
      if (upper_value == "VEVENT") {
        if (block) {
          result.diagnostics.push_back({block->begin_line, Severity::Error,
                                        "VEVENT starting at line " + std::to_string(block->begin_line) +
                                            " has no END:VEVENT before line " +
                                            std::to_string(logical.line)});
        }
        block = BlockBuilder{logical.line, {}};
        nested = 0;
      } else if (block) {
        ++nested;  // VALARM and friends
      }
      continue;
    }
    if (cl->name == "END") {
      if (upper_value == "VEVENT") {
        if (block) {
          finish(*block);
          block.reset();
        } else {
          result.diagnostics.push_back({logical.line, Severity::Error, "END:VEVENT without BEGIN"});
        }
      } else if (block && nested > 0) {
        --nested;
      }
      continue;
    }
    if (block && nested == 0) block->props.push_back(std::move(*cl));
  }
  if (block)
    result.diagnostics.push_back({block->begin_line, Severity::Error,
                                  "VEVENT starting at line " + std::to_string(block->begin_line) +
                                      " has no END:VEVENT"});
  return result;
}

/// Debug emitter. Output parses back into field-equal events.
inline std::string serialize_icalendar(const std::vector<CalendarEvent>& events,
                                       std::string_view extra_header = {}) {
  using namespace ical_detail;
  std::string out = "BEGIN:VCALENDAR\r\nVERSION:2.0\r\nPRODID:-//calbehav//EN\r\n";
  out += extra_header;
  auto stamp = [](std::string_view prop, const std::string& tzid, DateTime t, bool date_only) {
    std::string s(prop);
    if (date_only) return s + ";VALUE=DATE:" + format_ics_date(date_of(t));
    if (tzid == "UTC") return s + ":" + format_ics_datetime(t) + "Z";
    if (!tzid.empty()) s += ";TZID=" + tzid;
    return s + ":" + format_ics_datetime(t);
  };
  for (const auto& ev : events) {
    out += "BEGIN:VEVENT\r\n";
    append_folded(out, stamp("DTSTART", ev.start_tzid, ev.start, ev.all_day));
    append_folded(out, stamp("DTEND", ev.end_tzid, ev.end, ev.all_day));
    if (ev.recurrence) append_folded(out, "RRULE:" + format_rrule(*ev.recurrence));
    append_folded(out, "UID:" + ev.uid);
    if (ev.location) append_folded(out, "LOCATION:" + escape_text(*ev.location));
    if (!ev.status.empty()) append_folded(out, "STATUS:" + ev.status);
    append_folded(out, "SUMMARY:" + escape_text(ev.name));
    out += "END:VEVENT\r\n";
  }
  out += "END:VCALENDAR\r\n";
  return out;
}

namespace ical_detail {

inline bool has_day(const RecurrenceSpec& r, std::chrono::weekday wd) {
  return std::find(r.by_day.begin(), r.by_day.end(), wd) != r.by_day.end();
}

/// Calls emit(date) for each rule-matching date on or after the event start,
/// ascending, until emit returns false. A DTSTART that does not match its own
/// BYDAY set is not treated as an extra occurrence.
template <typename Emit>
void for_each_recurrence_date(const CalendarEvent& ev, Date horizon, Emit&& emit) {
  using namespace std::chrono;
  const auto& r = *ev.recurrence;
  const Date first = date_of(ev.start);
  switch (r.frequency) {
    case Frequency::Daily:
      for (Date d = first; d <= horizon; d += days{r.interval}) {
        if (!r.by_day.empty() && !has_day(r, weekday{d})) continue;
        if (!emit(d)) return;
      }
      return;
    case Frequency::Weekly: {
      std::vector<weekday> wanted = r.by_day;
      if (wanted.empty()) wanted.push_back(weekday{first});
      const Date week0 = first - days{iso_index(weekday{first})};
      for (Date base = week0; base <= horizon; base += days{7 * r.interval}) {
        for (auto wd : wanted) {
          const Date d = base + days{iso_index(wd)};
          if (d < first) continue;
          if (d > horizon) return;
          if (!emit(d)) return;
        }
      }
      return;
    }
    case Frequency::Monthly: {
      const year_month_day ymd{first};
      year_month ym{ymd.year(), ymd.month()};
      while (Date{ym / 1} <= horizon) {
        if (r.by_day.empty()) {
          const year_month_day cand{ym / ymd.day()};
          if (cand.ok() && !emit(Date{cand})) return;
        } else {
          for (Date d = Date{ym / 1}; d <= Date{ym / last}; d += days{1}) {
            if (d < first || !has_day(r, weekday{d})) continue;
            if (d > horizon) return;
            if (!emit(d)) return;
          }
        }
        ym += months{static_cast<int>(r.interval)};
      }
      return;
    }
  }
}

}  // namespace ical_detail

/// Dated instances of an event inside a closed window, ascending by date.
/// Multi-day events are truncated to their start day (end becomes 24:00).
inline std::vector<EventOccurrence> expand_occurrences(const CalendarEvent& ev, DateRange window) {
  using namespace std::chrono;
  if (window.last < window.first) throw ContractViolation("expansion window is inverted");

  const Date start_date = date_of(ev.start);
  const TimeOfDay start_time = time_of(ev.start);
  const TimeOfDay end_time = date_of(ev.end) == start_date ? time_of(ev.end) : TimeOfDay{hours{24}};

  std::vector<EventOccurrence> out;
  auto make = [&](Date d) {
    return EventOccurrence{ev.uid, ev.name, d, start_time, end_time, ev.type()};
  };

  if (!ev.recurrence) {
    if (window.contains(start_date)) out.push_back(make(start_date));
    return out;
  }

  const auto& r = *ev.recurrence;
  unsigned produced = 0;
  ical_detail::for_each_recurrence_date(ev, window.last, [&](Date d) {
    if (r.count && produced >= *r.count) return false;
    if (r.until && DateTime{d} + start_time > *r.until) return false;
    ++produced;
    if (d >= window.first) out.push_back(make(d));
    return true;
  });
  return out;
}

/// Expands every event and merges the occurrences in (date, start time, file order).
inline std::vector<EventOccurrence> expand_all(const std::vector<CalendarEvent>& events,
                                               DateRange window) {
  std::vector<EventOccurrence> all;
  for (const auto& ev : events) {
    auto occ = expand_occurrences(ev, window);
    all.insert(all.end(), std::make_move_iterator(occ.begin()), std::make_move_iterator(occ.end()));
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.start_time) < std::tie(b.date, b.start_time);
  });
  return all;
}

}  // namespace calbehav
