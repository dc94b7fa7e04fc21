#pragma once

// Call log and relationship-map ingestion.
//
// Call log CSV header: timestamp,call_type,duration_sec,contact
// Relationship CSV header: contact,relationship

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calbehav/core.hpp"

namespace calbehav {

enum class CallType : std::uint8_t { Incoming, Missed, Outgoing };

inline constexpr std::string_view to_string(CallType t) {
  switch (t) {
    case CallType::Incoming: return "incoming";
    case CallType::Missed: return "missed";
    case CallType::Outgoing: return "outgoing";
  }
  return "?";
}

struct CallRecord {
  DateTime timestamp{};
  CallType call_type = CallType::Incoming;
  std::uint32_t duration_sec = 0;
  std::string contact;
  std::size_t line = 0;

  friend bool operator==(const CallRecord& a, const CallRecord& b) {
    return a.timestamp == b.timestamp && a.call_type == b.call_type &&
           a.duration_sec == b.duration_sec && a.contact == b.contact;
  }
};

/// Incoming with zero duration is a rejection, incoming with a positive
/// duration an acceptance, a missed call is missed. Outgoing calls carry no
/// response behavior.
inline std::optional<Behavior> classify_behavior(const CallRecord& r) {
  switch (r.call_type) {
    case CallType::Incoming: return r.duration_sec == 0 ? Behavior::Reject : Behavior::Accept;
    case CallType::Missed: return Behavior::Missed;
    case CallType::Outgoing: return std::nullopt;
  }
  return std::nullopt;
}

struct ClassifiedCall {
  CallRecord record;
  Behavior behavior = Behavior::Reject;
};

/// Drops outgoing calls and attaches the behavior class; order is preserved.
inline std::vector<ClassifiedCall> classify_calls(const std::vector<CallRecord>& records) {
  std::vector<ClassifiedCall> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (auto b = classify_behavior(r)) out.push_back({r, *b});
  return out;
}

class RelationshipMap {
 public:
  static constexpr std::string_view kUnknown = "unknown";

  RelationshipMap() = default;
  explicit RelationshipMap(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  /// Total: unmapped contacts resolve to "unknown".
  [[nodiscard]] std::string resolve(std::string_view contact) const {
    if (auto it = entries_.find(std::string(contact)); it != entries_.end()) return it->second;
    return std::string(kUnknown);
  }

  bool insert(std::string contact, std::string label) {
    return entries_.emplace(std::move(contact), std::move(label)).second;
  }

  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

inline std::string resolve_relationship(std::string_view contact, const RelationshipMap& map) {
  return map.resolve(contact);
}

namespace csv {

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Maps each required column name to its index in the header row.
template <std::size_t N>
std::array<std::size_t, N> locate_columns(std::string_view header,
                                          const std::array<std::string_view, N>& required) {
  auto names = split(header);
  for (auto& n : names) n = ascii_lower(trim(n));
  if (!names.empty() && names.front().rfind("\xEF\xBB\xBF", 0) == 0) names.front().erase(0, 3);
  std::array<std::size_t, N> idx{};
  for (std::size_t k = 0; k < N; ++k) {
    auto it = std::find(names.begin(), names.end(), required[k]);
    if (it == names.end())
      throw InputError("missing column '" + std::string(required[k]) + "' in header");
    idx[k] = static_cast<std::size_t>(it - names.begin());
  }
  return idx;
}

}  // namespace csv

/// Parses the call log and returns records sorted ascending by timestamp
/// (stable, so duplicates keep file order). Bad rows are skipped with a
/// diagnostic; a missing header or column throws InputError.
inline ParseResult<CallRecord> parse_call_log(std::string_view text) {
  static constexpr std::array<std::string_view, 4> kColumns{"timestamp", "call_type",
                                                            "duration_sec", "contact"};
  ParseResult<CallRecord> result;
  const auto lines = split_lines(text);
  std::size_t header_at = 0;
  while (header_at < lines.size() && trim(lines[header_at]).empty()) ++header_at;
  if (header_at == lines.size()) throw InputError("call log has no header row");
  const auto col = csv::locate_columns(lines[header_at], kColumns);

  for (std::size_t i = header_at + 1; i < lines.size(); ++i) {
    const std::size_t number = i + 1;
    if (trim(lines[i]).empty()) continue;
    auto fields = csv::split(lines[i]);
    auto fail = [&](std::string msg) {
      result.diagnostics.push_back({number, Severity::Error, std::move(msg)});
    };
    if (fields.size() <= *std::max_element(col.begin(), col.end())) {
      fail("expected at least " + std::to_string(*std::max_element(col.begin(), col.end()) + 1) +
           " fields, found " + std::to_string(fields.size()));
      continue;
    }
    CallRecord rec;
    rec.line = number;
    const auto ts = parse_datetime(trim(fields[col[0]]));
    if (!ts) {
      fail("unparseable timestamp '" + fields[col[0]] + "'");
      continue;
    }
    rec.timestamp = *ts;
    const auto type = ascii_lower(trim(fields[col[1]]));
    if (type == "incoming") rec.call_type = CallType::Incoming;
    else if (type == "missed") rec.call_type = CallType::Missed;
    else if (type == "outgoing") rec.call_type = CallType::Outgoing;
    else {
      fail("unknown call_type '" + fields[col[1]] + "'");
      continue;
    }
    if (!detail::parse_digits(trim(fields[col[2]]), rec.duration_sec)) {
      fail("duration_sec must be a non-negative integer, got '" + fields[col[2]] + "'");
      continue;
    }
    if (rec.call_type == CallType::Missed && rec.duration_sec != 0) {
      result.diagnostics.push_back(
          {number, Severity::Warning,
           "missed call with non-zero duration; trusting call_type and clearing duration"});
      rec.duration_sec = 0;
    }
    rec.contact = trim(fields[col[3]]);
    result.items.push_back(std::move(rec));
  }
  std::stable_sort(result.items.begin(), result.items.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return result;
}

struct RelationshipParse {
  RelationshipMap map;
  std::vector<Diagnostic> diagnostics;
};

inline RelationshipParse parse_relationships(std::string_view text) {
  static constexpr std::array<std::string_view, 2> kColumns{"contact", "relationship"};
  RelationshipParse result;
  const auto lines = split_lines(text);
  std::size_t header_at = 0;
  while (header_at < lines.size() && trim(lines[header_at]).empty()) ++header_at;
  if (header_at == lines.size()) return result;
  const auto col = csv::locate_columns(lines[header_at], kColumns);
  for (std::size_t i = header_at + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fields = csv::split(lines[i]);
    if (fields.size() <= std::max(col[0], col[1])) {
      result.diagnostics.push_back({i + 1, Severity::Error, "too few fields"});
      continue;
    }
    auto contact = trim(fields[col[0]]);
    auto label = trim(fields[col[1]]);
    if (contact.empty() || label.empty()) {
      result.diagnostics.push_back({i + 1, Severity::Error, "empty contact or relationship"});
      continue;
    }
    if (!result.map.insert(contact, label))
      result.diagnostics.push_back(
          {i + 1, Severity::Warning, "duplicate contact '" + contact + "'; keeping first label"});
  }
  return result;
}

inline std::string serialize_call_log(const std::vector<CallRecord>& records) {
  std::string out = "timestamp,call_type,duration_sec,contact\n";
  for (const auto& r : records) {
    out += format_datetime(r.timestamp);
    out += ',';
    out += to_string(r.call_type);
    out += ',';
    out += std::to_string(r.duration_sec);
    out += ',';
    out += csv::quote(r.contact);
    out += '\n';
  }
  return out;
}

inline std::string serialize_relationships(const RelationshipMap& map) {
  std::string out = "contact,relationship\n";
  for (const auto& [contact, label] : map.entries())
    out += csv::quote(contact) + "," + csv::quote(label) + "\n";
  return out;
}

}  // namespace calbehav
