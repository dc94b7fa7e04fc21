#pragma once

// Event-behavior mapping: joins calendar occurrences with classified calls by
// temporal containment and emits the labelled context rows used for mining.

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "calbehav/calendar.hpp"
#include "calbehav/core.hpp"
#include "calbehav/phonelog.hpp"

namespace calbehav {

struct ContextVector {
  std::string event_name;
  EventType event_type = EventType::NonRecurring;
  std::string day_time;  // e.g. Monday[12:00-16:00]
  std::string relationship;

  [[nodiscard]] std::string value(Attribute a) const {
    switch (a) {
      case Attribute::EventName: return event_name;
      case Attribute::EventType: return std::string(to_string(event_type));
      case Attribute::DayTime: return day_time;
      case Attribute::Relationship: return relationship;
    }
    return {};
  }

  friend bool operator==(const ContextVector&, const ContextVector&) = default;
};

struct EventBehaviorInstance {
  ContextVector context;
  Behavior behavior = Behavior::Reject;
  DateTime source_timestamp{};

  friend bool operator==(const EventBehaviorInstance&, const EventBehaviorInstance&) = default;
};

inline std::string day_time_label(const EventOccurrence& occ) {
  return std::string(weekday_name(std::chrono::weekday{occ.date})) + "[" +
         format_time(occ.start_time) + "-" + format_time(occ.end_time) + "]";
}

inline ContextVector context_for(const EventOccurrence& occ, const CallRecord& call,
                                 const RelationshipMap& map) {
  return ContextVector{occ.event_name, occ.event_type, day_time_label(occ), map.resolve(call.contact)};
}

/// The event argument supplies name and recurrence class; the occurrence
/// supplies weekday and span.
inline ContextVector build_context_vector(const EventOccurrence& occ, const CalendarEvent& ev,
                                          const CallRecord& call, const RelationshipMap& map) {
  return ContextVector{ev.name, ev.type(), day_time_label(occ), map.resolve(call.contact)};
}

/// Spans are closed-open: a call at exactly the end time does not belong to
/// the occurrence. A call inside k overlapping occurrences yields k rows.
/// Output is ordered by occurrence date, then call timestamp, then
/// occurrence start time, then occurrence position in the input.
inline std::vector<EventBehaviorInstance> map_events_to_behavior(
    const std::vector<EventOccurrence>& occurrences, const std::vector<ClassifiedCall>& calls,
    const RelationshipMap& relationships) {
  std::vector<std::size_t> by_time(calls.size());
  std::iota(by_time.begin(), by_time.end(), std::size_t{0});
  std::stable_sort(by_time.begin(), by_time.end(), [&](std::size_t a, std::size_t b) {
    return calls[a].record.timestamp < calls[b].record.timestamp;
  });

  struct Hit {
    std::size_t occ;
    std::size_t call;
  };
  std::vector<Hit> hits;
  for (std::size_t o = 0; o < occurrences.size(); ++o) {
    const auto begin = occurrences[o].start();
    const auto end = occurrences[o].end();
    auto it = std::lower_bound(by_time.begin(), by_time.end(), begin, [&](std::size_t c, DateTime t) {
      return calls[c].record.timestamp < t;
    });
    for (; it != by_time.end() && calls[*it].record.timestamp < end; ++it) hits.push_back({o, *it});
  }
  std::stable_sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
    const auto& oa = occurrences[a.occ];
    const auto& ob = occurrences[b.occ];
    return std::tie(oa.date, calls[a.call].record.timestamp, oa.start_time, a.occ) <
           std::tie(ob.date, calls[b.call].record.timestamp, ob.start_time, b.occ);
  });

  std::vector<EventBehaviorInstance> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    const auto& call = calls[h.call];
    out.push_back({context_for(occurrences[h.occ], call.record, relationships), call.behavior,
                   call.record.timestamp});
  }
  return out;
}

/// CSV with header event_name,event_type,day_time,relationship,behavior,timestamp.
inline std::string export_instances_csv(const std::vector<EventBehaviorInstance>& rows) {
  std::string out = "event_name,event_type,day_time,relationship,behavior,timestamp\n";
  for (const auto& r : rows) {
    out += csv::quote(r.context.event_name) + ',' + std::string(to_string(r.context.event_type)) + ',' +
           csv::quote(r.context.day_time) + ',' + csv::quote(r.context.relationship) + ',' +
           std::string(to_string(r.behavior)) + ',' + format_datetime(r.source_timestamp) + '\n';
  }
  return out;
}

}  // namespace calbehav
