#include <gtest/gtest.h>

#include "calbehav/pipeline.hpp"
#include "oracles.hpp"

using namespace calbehav;
using namespace std::chrono;

namespace {

EventOccurrence meeting_monday() {
  // 2016-09-05 is a Monday
  return {"m1", "Meeting", sys_days{2016y / September / 5}, hours{10}, hours{12}, EventType::Recurring};
}

ClassifiedCall call_at(DateTime t, Behavior b, std::string contact = "C1") {
  ClassifiedCall c;
  c.record.timestamp = t;
  c.record.contact = std::move(contact);
  c.record.call_type = b == Behavior::Missed ? CallType::Missed : CallType::Incoming;
  c.record.duration_sec = b == Behavior::Accept ? 30 : 0;
  c.behavior = b;
  return c;
}

}  // namespace

TEST(MapEventsToBehavior, CallInsideMondayMeeting) {
  RelationshipMap rel;
  rel.insert("C1", "colleague");
  const auto occ = meeting_monday();
  const auto rows = map_events_to_behavior({occ}, {call_at(occ.start() + minutes{31}, Behavior::Reject)}, rel);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].context, (ContextVector{"Meeting", EventType::Recurring, "Monday[10:00-12:00]", "colleague"}));
  EXPECT_EQ(rows[0].behavior, Behavior::Reject);
}

TEST(MapEventsToBehavior, SpansAreClosedOpen) {
  const auto occ = meeting_monday();
  const std::vector<ClassifiedCall> calls{call_at(occ.start() - minutes{1}, Behavior::Reject),
                                          call_at(occ.start(), Behavior::Accept),
                                          call_at(occ.end() - seconds{1}, Behavior::Missed),
                                          call_at(occ.end(), Behavior::Reject)};
  const auto rows = map_events_to_behavior({occ}, calls, {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].behavior, Behavior::Accept);
  EXPECT_EQ(rows[1].behavior, Behavior::Missed);
  EXPECT_EQ(rows[0].context.relationship, "unknown");
}

TEST(MapEventsToBehavior, OverlappingEventsEachGetTheCall) {
  auto a = meeting_monday();
  EventOccurrence b{"s1", "Seminar", a.date, hours{11}, hours{13}, EventType::NonRecurring};
  const auto rows = map_events_to_behavior({a, b}, {call_at(a.start() + minutes{75}, Behavior::Reject)}, {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].context.event_name, "Meeting");
  EXPECT_EQ(rows[1].context.event_name, "Seminar");
  EXPECT_EQ(rows[1].context.day_time, "Monday[11:00-13:00]");
}

TEST(MapEventsToBehavior, EmptyInputs) {
  EXPECT_TRUE(map_events_to_behavior({}, {}, {}).empty());
  EXPECT_TRUE(map_events_to_behavior({meeting_monday()}, {}, {}).empty());
}

TEST(MapEventsToBehavior, ThreeOccurrencesTwentyCallsMatchOracle) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    std::vector<EventOccurrence> occ;
    for (int i = 0; i < 3; ++i) {
      const auto s = 9 * 60 + 30 * static_cast<int>(rng.uniform_below(10));
      occ.push_back({"u" + std::to_string(i), "E" + std::to_string(i), sys_days{2016y / September / 5},
                     minutes{s}, minutes{s + 30 + 30 * static_cast<int>(rng.uniform_below(4))},
                     EventType::NonRecurring});
    }
    std::vector<ClassifiedCall> calls;
    for (int i = 0; i < 20; ++i)
      calls.push_back(call_at(DateTime{sys_days{2016y / September / 5}} + hours{9} + minutes{rng.uniform_below(360)},
                              static_cast<Behavior>(rng.uniform_below(3)), "C" + std::to_string(i % 3)));
    std::stable_sort(calls.begin(), calls.end(),
                     [](auto& x, auto& y) { return x.record.timestamp < y.record.timestamp; });
    RelationshipMap rel;
    rel.insert("C0", "boss");
    EXPECT_EQ(map_events_to_behavior(occ, calls, rel), oracle::all_pairs_join(occ, calls, rel));
  }
}

TEST(MapEventsToBehavior, NoRowOutsideItsOccurrence) {
  Rng rng(77);
  std::vector<EventOccurrence> occ;
  for (int i = 0; i < 40; ++i) {
    const auto s = 8 * 60 + 15 * static_cast<int>(rng.uniform_below(40));
    occ.push_back({"u", "E", sys_days{2016y / June / 1} + days{rng.uniform_below(10)}, minutes{s},
                   minutes{s + 45}, EventType::Recurring});
  }
  std::vector<ClassifiedCall> calls;
  for (int i = 0; i < 400; ++i)
    calls.push_back(call_at(DateTime{sys_days{2016y / June / 1}} + minutes{rng.uniform_below(10 * 1440)},
                            Behavior::Reject));
  std::sort(calls.begin(), calls.end(), [](auto& x, auto& y) { return x.record.timestamp < y.record.timestamp; });
  const auto rows = map_events_to_behavior(occ, calls, {});
  for (const auto& r : rows) {
    // the day_time label carries the span; check the timestamp sits inside it
    const auto tod = time_of(r.source_timestamp);
    const auto& label = r.context.day_time;
    const int sh = std::stoi(label.substr(label.find('[') + 1, 2));
    const int sm = std::stoi(label.substr(label.find('[') + 4, 2));
    const int eh = std::stoi(label.substr(label.find('-') + 1, 2));
    const int em = std::stoi(label.substr(label.find('-') + 4, 2));
    EXPECT_GE(tod, hours{sh} + minutes{sm});
    EXPECT_LT(tod, hours{eh} + minutes{em});
  }
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_LE(date_of(rows[i - 1].source_timestamp), date_of(rows[i].source_timestamp));
}

TEST(BuildContextVector, FromBiweeklyMeeting) {
  const std::string ics =
      "BEGIN:VEVENT\nDTSTART;TZID=Australia/Sydney:20160602T080000\nDTEND;TZID=Australia/Sydney:20160602T090000\n"
      "RRULE:FREQ=WEEKLY;INTERVAL=2;BYDAY=TH\nSUMMARY:Meeting\nEND:VEVENT\n";
  const auto ev = parse_icalendar(ics).items.at(0);
  const auto occ = expand_occurrences(ev, {sys_days{2016y / June / 1}, sys_days{2016y / June / 30}});
  RelationshipMap rel;
  rel.insert("C01", "boss");
  CallRecord call{occ[1].start() + minutes{20}, CallType::Incoming, 0, "C01", 0};
  EXPECT_EQ(build_context_vector(occ[1], ev, call, rel),
            (ContextVector{"Meeting", EventType::Recurring, "Thursday[08:00-09:00]", "boss"}));
  call.contact = "C77";
  EXPECT_EQ(build_context_vector(occ[1], ev, call, rel).relationship, "unknown");
  auto one_off = ev;
  one_off.recurrence.reset();
  EXPECT_EQ(build_context_vector(occ[0], one_off, call, rel).event_type, EventType::NonRecurring);
}

TEST(Pipeline, OutgoingCallsNeverReachMapping) {
  const std::string ics =
      "BEGIN:VEVENT\nDTSTART:20160602T080000\nDTEND:20160602T090000\nSUMMARY:Meeting\nEND:VEVENT\n";
  const std::string log =
      "timestamp,call_type,duration_sec,contact\n"
      "2016-06-02 08:10:00,outgoing,30,C1\n"
      "2016-06-02 08:20:00,incoming,0,C1\n"
      "2016-06-02 09:20:00,incoming,0,C1\n";
  const auto ds = build_dataset({ics, log, ""});
  EXPECT_EQ(ds.calls.size(), 3u);
  EXPECT_EQ(ds.classified.size(), 2u);
  ASSERT_EQ(ds.instances.size(), 1u);
  EXPECT_EQ(ds.instances[0].behavior, Behavior::Reject);
  ASSERT_TRUE(ds.window);
  EXPECT_EQ(ds.window->first, sys_days{2016y / June / 2});
}

TEST(Pipeline, InstanceCsvExport) {
  std::vector<EventBehaviorInstance> rows{
      {{"Lunch, late", EventType::NonRecurring, "Friday[12:00-13:00]", "friend"},
       Behavior::Accept,
       DateTime{sys_days{2016y / June / 3}} + hours{12} + minutes{5}}};
  EXPECT_EQ(export_instances_csv(rows),
            "event_name,event_type,day_time,relationship,behavior,timestamp\n"
            "\"Lunch, late\",NonRecurring,Friday[12:00-13:00],friend,Accept,2016-06-03 12:05:00\n");
}
