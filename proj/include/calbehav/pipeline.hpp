#pragma once

// Ingest -> expand -> map: turns the three input texts of one user into
// event-behavior rows.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "calbehav/calendar.hpp"
#include "calbehav/mapping.hpp"
#include "calbehav/phonelog.hpp"

namespace calbehav {

/// Raw file contents for one user.
struct BundleText {
  std::string calendar_ics;
  std::string call_log_csv;
  std::string relationships_csv;
};

struct SourceDiagnostic {
  std::string source;
  Diagnostic diagnostic;
};

inline std::string to_string(const SourceDiagnostic& d) {
  return d.source + ": " + to_string(d.diagnostic);
}

struct Dataset {
  std::vector<CalendarEvent> events;
  std::vector<CallRecord> calls;
  std::vector<ClassifiedCall> classified;
  RelationshipMap relationships;
  std::optional<DateRange> window;
  std::vector<EventOccurrence> occurrences;
  std::vector<EventBehaviorInstance> instances;
  std::vector<SourceDiagnostic> diagnostics;

  [[nodiscard]] bool has_errors() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const auto& d) { return d.diagnostic.severity == Severity::Error; });
  }
};

/// First through last call date, or nullopt for an empty log.
inline std::optional<DateRange> call_log_span(const std::vector<CallRecord>& calls) {
  if (calls.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(calls.begin(), calls.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  return DateRange{date_of(lo->timestamp), date_of(hi->timestamp)};
}

/// Runs the whole ingestion pipeline. The expansion window defaults to the
/// call log's date span. Throws InputError on structurally unusable CSV.
inline Dataset build_dataset(const BundleText& in, std::optional<DateRange> window = std::nullopt) {
  Dataset ds;
  auto cal = parse_icalendar(in.calendar_ics);
  for (auto& d : cal.diagnostics) ds.diagnostics.push_back({"calendar", std::move(d)});
  ds.events = std::move(cal.items);

  auto log = parse_call_log(in.call_log_csv);
  for (auto& d : log.diagnostics) ds.diagnostics.push_back({"calls", std::move(d)});
  ds.calls = std::move(log.items);
  ds.classified = classify_calls(ds.calls);

  if (!in.relationships_csv.empty()) {
    auto rel = parse_relationships(in.relationships_csv);
    for (auto& d : rel.diagnostics) ds.diagnostics.push_back({"relationships", std::move(d)});
    ds.relationships = std::move(rel.map);
  }

  ds.window = window ? window : call_log_span(ds.calls);
  if (ds.window) ds.occurrences = expand_all(ds.events, *ds.window);
  ds.instances = map_events_to_behavior(ds.occurrences, ds.classified, ds.relationships);
  return ds;
}

}  // namespace calbehav
