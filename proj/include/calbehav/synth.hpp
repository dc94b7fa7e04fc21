#pragma once

// Seeded synthetic users: a calendar, a call log and a relationship map
// generated from a behavior profile with known ground truth.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "calbehav/baselines.hpp"
#include "calbehav/calendar.hpp"
#include "calbehav/phonelog.hpp"
#include "calbehav/pipeline.hpp"
#include "calbehav/random.hpp"

namespace calbehav {

using BehaviorWeights = std::array<double, 3>;  // indexed by Behavior

struct EventTemplate {
  std::string name;
  /// Only frequency and interval are used; the weekday comes from below.
  std::optional<RecurrenceSpec> recurrence;
  std::chrono::weekday weekday = std::chrono::Monday;
  TimeOfDay start{};
  TimeOfDay end{};
  /// One-off templates become this many separate non-recurring events.
  unsigned occurrences = 1;
};

struct ContextPredicate {
  std::optional<std::string> event_name;
  std::optional<EventType> event_type;
  std::optional<std::string> relationship;

  [[nodiscard]] bool matches(std::string_view name, EventType type, std::string_view rel) const {
    return (!event_name || *event_name == name) && (!event_type || *event_type == type) &&
           (!relationship || *relationship == rel);
  }
};

struct PolicyEntry {
  ContextPredicate when;
  BehaviorWeights distribution{};
};

struct Contact {
  std::string id;
  /// Empty means the contact is absent from the relationship file.
  std::string relationship;
  double weight = 1.0;
};

struct UserProfile {
  std::uint64_t seed = 0;
  std::vector<EventTemplate> events;
  /// First matching entry wins; default_distribution applies otherwise.
  std::vector<PolicyEntry> behavior_policy;
  BehaviorWeights default_distribution{0.0, 1.0, 0.0};
  double call_rate = 4.0;
  std::vector<Contact> contacts;
  double noise = 0.0;
  /// Mean number of extra outgoing calls per occurrence (filtered out later).
  double outgoing_rate = 0.0;

  void validate() const {
    auto check = [](const BehaviorWeights& w, const std::string& what) {
      double s = 0.0;
      for (double p : w) {
        if (p < 0.0) throw InputError(what + ": negative probability");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-9) throw InputError(what + ": probabilities must sum to 1");
    };
    for (std::size_t i = 0; i < behavior_policy.size(); ++i)
      check(behavior_policy[i].distribution, "behavior_policy[" + std::to_string(i) + "]");
    check(default_distribution, "default distribution");
    if (!(call_rate > 0.0)) throw InputError("call_rate must be positive");
    if (noise < 0.0 || noise >= 0.5) throw InputError("noise must lie in [0, 0.5)");
    if (contacts.empty()) throw InputError("profile needs at least one contact");
    for (const auto& e : events)
      if (e.end <= e.start) throw InputError("event template '" + e.name + "' has end <= start");
  }

  [[nodiscard]] const BehaviorWeights& policy_for(std::string_view name, EventType type,
                                                  std::string_view rel) const {
    for (const auto& p : behavior_policy)
      if (p.when.matches(name, type, rel)) return p.distribution;
    return default_distribution;
  }
};

struct Bundle {
  BundleText text;
  std::string truth_json;
};

namespace synth_detail {

inline std::string rel_or_unknown(const Contact& c) {
  return c.relationship.empty() ? std::string(RelationshipMap::kUnknown) : c.relationship;
}

inline std::string header(std::uint64_t seed) {
  return "X-CALBEHAV-SEED:" + std::to_string(seed) + "\r\nX-CALBEHAV-RNG:" +
         std::string(Rng::kAlgorithm) + "\r\n";
}

inline Date first_on_or_after(Date d, std::chrono::weekday wd) {
  while (std::chrono::weekday{d} != wd) d += std::chrono::days{1};
  return d;
}

inline std::optional<TimeOfDay> parse_hhmm(std::string_view s) {
  if (s.size() != 5 || s[2] != ':') return std::nullopt;
  int h = 0, m = 0;
  if (!detail::parse_digits(s.substr(0, 2), h) || !detail::parse_digits(s.substr(3, 2), m))
    return std::nullopt;
  if (h == 24 && m == 0) return TimeOfDay{24 * 3600};
  return detail::make_time(h, m, 0);
}

inline nlohmann::json weights_to_json(const BehaviorWeights& w) {
  nlohmann::json j = nlohmann::json::object();
  for (auto b : kBehaviors) j[std::string(to_string(b))] = w[static_cast<std::size_t>(b)];
  return j;
}

inline BehaviorWeights weights_from_json(const nlohmann::json& j) {
  BehaviorWeights w{};
  for (const auto& [k, v] : j.items()) {
    auto b = parse_behavior(k);
    if (!b) throw InputError("unknown behavior '" + k + "' in distribution");
    w[static_cast<std::size_t>(*b)] = v.get<double>();
  }
  return w;
}

inline CallRecord make_call(DateTime at, Behavior b, std::string contact, Rng& rng) {
  CallRecord r;
  r.timestamp = at;
  r.contact = std::move(contact);
  switch (b) {
    case Behavior::Reject: r.call_type = CallType::Incoming; r.duration_sec = 0; break;
    case Behavior::Accept:
      r.call_type = CallType::Incoming;
      r.duration_sec = 5 + static_cast<std::uint32_t>(rng.uniform_below(600));
      break;
    case Behavior::Missed: r.call_type = CallType::Missed; r.duration_sec = 0; break;
  }
  return r;
}

}  // namespace synth_detail

/// Deterministic under profile.seed: same profile and span give byte-identical
/// files. Recurring templates start on the first matching weekday in the span
/// and run until its last day; one-off templates land on distinct random
/// matching weekdays.
inline Bundle generate_bundle(const UserProfile& profile, DateRange span) {
  using namespace std::chrono;
  if (span.last < span.first) throw ContractViolation("synthesis span is inverted");
  profile.validate();
  Rng rng(profile.seed);

  std::vector<CalendarEvent> events;
  for (std::size_t t = 0; t < profile.events.size(); ++t) {
    const auto& tpl = profile.events[t];
    auto make = [&](Date d, std::size_t k) {
      CalendarEvent ev;
      ev.uid = "synth-" + std::to_string(profile.seed) + "-" + std::to_string(t) + "-" + std::to_string(k) +
               "@calbehav";
      ev.name = tpl.name;
      ev.start = DateTime{d} + tpl.start;
      ev.end = DateTime{d} + tpl.end;
      ev.status = "CONFIRMED";
      return ev;
    };
    const Date first = synth_detail::first_on_or_after(span.first, tpl.weekday);
    if (first > span.last) continue;
    if (tpl.recurrence) {
      CalendarEvent ev = make(first, 0);
      RecurrenceSpec r = *tpl.recurrence;
      if (r.frequency == Frequency::Weekly && r.by_day.empty()) r.by_day = {tpl.weekday};
      r.until = DateTime{span.last} + hours{24} - seconds{1};
      r.until_is_date = true;
      ev.recurrence = r;
      events.push_back(std::move(ev));
    } else {
      std::vector<Date> candidates;
      for (Date d = first; d <= span.last; d += days{7}) candidates.push_back(d);
      rng.shuffle(candidates);
      candidates.resize(std::min<std::size_t>(candidates.size(), tpl.occurrences));
      std::sort(candidates.begin(), candidates.end());
      for (std::size_t k = 0; k < candidates.size(); ++k) events.push_back(make(candidates[k], k));
    }
  }

  std::vector<double> weights;
  for (const auto& c : profile.contacts) weights.push_back(c.weight);

  std::vector<CallRecord> calls;
  nlohmann::json observed = nlohmann::json::object();
  for (const auto& occ : expand_all(events, span)) {
    const auto length = static_cast<std::uint64_t>((occ.end_time - occ.start_time).count());
    const unsigned n = rng.poisson(profile.call_rate);
    for (unsigned i = 0; i < n; ++i) {
      const DateTime at = occ.start() + seconds{rng.uniform_below(length)};
      const auto& contact = profile.contacts[rng.pick_weighted(weights)];
      const auto rel = synth_detail::rel_or_unknown(contact);
      const auto& dist = profile.policy_for(occ.event_name, occ.event_type, rel);
      auto b = static_cast<Behavior>(rng.pick_weighted({dist.begin(), dist.end()}));
      if (profile.noise > 0.0 && rng.bernoulli(profile.noise)) {
        // flip to one of the other two classes
        b = static_cast<Behavior>((static_cast<unsigned>(b) + 1 + rng.uniform_below(2)) % 3);
      }
      auto& count = observed[occ.event_name][rel][std::string(to_string(b))];
      count = count.is_null() ? 1 : count.get<int>() + 1;
      calls.push_back(synth_detail::make_call(at, b, contact.id, rng));
    }
    const unsigned out = profile.outgoing_rate > 0.0 ? rng.poisson(profile.outgoing_rate) : 0;
    for (unsigned i = 0; i < out; ++i) {
      CallRecord r;
      r.timestamp = occ.start() + seconds{rng.uniform_below(length)};
      r.call_type = CallType::Outgoing;
      r.duration_sec = 10 + static_cast<std::uint32_t>(rng.uniform_below(300));
      r.contact = profile.contacts[rng.pick_weighted(weights)].id;
      calls.push_back(std::move(r));
    }
  }
  std::stable_sort(calls.begin(), calls.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  RelationshipMap rels;
  for (const auto& c : profile.contacts)
    if (!c.relationship.empty()) rels.insert(c.id, c.relationship);

  Bundle b;
  b.text.calendar_ics = serialize_icalendar(events, synth_detail::header(profile.seed));
  b.text.call_log_csv = serialize_call_log(calls);
  b.text.relationships_csv = serialize_relationships(rels);

  nlohmann::json truth;
  truth["seed"] = profile.seed;
  truth["rng"] = Rng::kAlgorithm;
  truth["span"] = {{"first", format_date(span.first)}, {"last", format_date(span.last)}};
  truth["noise"] = profile.noise;
  nlohmann::json policy = nlohmann::json::array();
  for (const auto& p : profile.behavior_policy) {
    nlohmann::json when = nlohmann::json::object();
    if (p.when.event_name) when["event_name"] = *p.when.event_name;
    if (p.when.event_type) when["event_type"] = to_string(*p.when.event_type);
    if (p.when.relationship) when["relationship"] = *p.when.relationship;
    policy.push_back({{"when", when}, {"distribution", synth_detail::weights_to_json(p.distribution)}});
  }
  truth["behavior_policy"] = policy;
  truth["default"] = synth_detail::weights_to_json(profile.default_distribution);
  truth["observed"] = observed;
  b.truth_json = truth.dump(2) + "\n";
  return b;
}

/// Reads a profile from its JSON form (see README for the schema).
inline UserProfile profile_from_json(const nlohmann::json& j) {
  using synth_detail::parse_hhmm;
  try {
    UserProfile p;
    p.seed = j.value("seed", std::uint64_t{0});
    p.call_rate = j.value("call_rate", 4.0);
    p.noise = j.value("noise", 0.0);
    p.outgoing_rate = j.value("outgoing_rate", 0.0);
    for (const auto& c : j.at("contacts"))
      p.contacts.push_back({c.at("id").get<std::string>(), c.value("relationship", std::string{}),
                            c.value("weight", 1.0)});
    for (const auto& e : j.at("events")) {
      EventTemplate t;
      t.name = e.at("name").get<std::string>();
      auto wd = parse_weekday_code(e.at("weekday").get<std::string>());
      auto start = parse_hhmm(e.at("start").get<std::string>());
      auto end = parse_hhmm(e.at("end").get<std::string>());
      if (!wd || !start || !end) throw InputError("bad weekday/start/end in event '" + t.name + "'");
      t.weekday = *wd;
      t.start = *start;
      t.end = *end;
      if (e.contains("recurrence") && !e["recurrence"].is_null()) {
        const auto& r = e["recurrence"];
        RecurrenceSpec spec;
        const auto f = ascii_lower(r.value("frequency", std::string("weekly")));
        if (f == "daily") spec.frequency = Frequency::Daily;
        else if (f == "weekly") spec.frequency = Frequency::Weekly;
        else if (f == "monthly") spec.frequency = Frequency::Monthly;
        else throw InputError("unsupported frequency '" + f + "'");
        spec.interval = r.value("interval", 1u);
        if (spec.interval == 0) throw InputError("interval must be >= 1");
        t.recurrence = spec;
      }
      t.occurrences = e.value("occurrences", 1u);
      p.events.push_back(std::move(t));
    }
    for (const auto& entry : j.value("behavior_policy", nlohmann::json::array())) {
      PolicyEntry pe;
      const auto& w = entry.value("when", nlohmann::json::object());
      if (w.contains("event_name")) pe.when.event_name = w["event_name"].get<std::string>();
      if (w.contains("relationship")) pe.when.relationship = w["relationship"].get<std::string>();
      if (w.contains("event_type")) {
        const auto s = w["event_type"].get<std::string>();
        if (s == "Recurring") pe.when.event_type = EventType::Recurring;
        else if (s == "NonRecurring") pe.when.event_type = EventType::NonRecurring;
        else throw InputError("unknown event_type '" + s + "'");
      }
      pe.distribution = synth_detail::weights_from_json(entry.at("distribution"));
      p.behavior_policy.push_back(std::move(pe));
    }
    if (j.contains("default")) p.default_distribution = synth_detail::weights_from_json(j["default"]);
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("profile JSON: ") + e.what());
  }
}

inline nlohmann::json profile_to_json(const UserProfile& p) {
  nlohmann::json j;
  j["seed"] = p.seed;
  j["call_rate"] = p.call_rate;
  j["noise"] = p.noise;
  j["outgoing_rate"] = p.outgoing_rate;
  j["contacts"] = nlohmann::json::array();
  for (const auto& c : p.contacts)
    j["contacts"].push_back({{"id", c.id}, {"relationship", c.relationship}, {"weight", c.weight}});
  j["events"] = nlohmann::json::array();
  for (const auto& e : p.events) {
    nlohmann::json ej{{"name", e.name},
                      {"weekday", weekday_code(e.weekday)},
                      {"start", format_time(e.start)},
                      {"end", format_time(e.end)}};
    if (e.recurrence) {
      ej["recurrence"] = {{"frequency", ascii_lower(to_string(e.recurrence->frequency))},
                          {"interval", e.recurrence->interval}};
    } else {
      ej["occurrences"] = e.occurrences;
    }
    j["events"].push_back(ej);
  }
  j["behavior_policy"] = nlohmann::json::array();
  for (const auto& pe : p.behavior_policy) {
    nlohmann::json w = nlohmann::json::object();
    if (pe.when.event_name) w["event_name"] = *pe.when.event_name;
    if (pe.when.event_type) w["event_type"] = to_string(*pe.when.event_type);
    if (pe.when.relationship) w["relationship"] = *pe.when.relationship;
    j["behavior_policy"].push_back({{"when", w}, {"distribution", synth_detail::weights_to_json(pe.distribution)}});
  }
  j["default"] = synth_detail::weights_to_json(p.default_distribution);
  return j;
}

/// A randomly drawn but reproducible user: five events in distinct weekly
/// slots, per-event dominant behaviors, and relationship-specific exceptions.
/// At least one event contradicts the default keyword table, so no profile
/// is a pure keyword user.
inline UserProfile heterogeneous_profile(std::uint64_t seed) {
  using namespace std::chrono;
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  UserProfile p;
  p.seed = seed;
  p.call_rate = 3.0 + static_cast<double>(rng.uniform_below(3));
  p.noise = 0.03;
  p.outgoing_rate = 0.3;

  std::vector<std::string> names{"Meeting", "Lecture", "Seminar", "Practical", "Tea-party", "Busy",
                                 "Lunch", "Class", "Appointment", "Workshop", "Gym", "Reading group"};
  rng.shuffle(names);
  names.resize(5);

  struct Slot {
    unsigned weekday;
    int start_min;
  };
  std::vector<Slot> slots;
  for (unsigned wd = 1; wd <= 5; ++wd)
    for (int s : {9 * 60, 11 * 60, 14 * 60, 16 * 60}) slots.push_back({wd, s});
  rng.shuffle(slots);

  for (std::size_t i = 0; i < names.size(); ++i) {
    EventTemplate t;
    t.name = names[i];
    t.weekday = weekday{slots[i].weekday};
    t.start = minutes{slots[i].start_min};
    t.end = t.start + minutes{60 + 30 * static_cast<int>(rng.uniform_below(2))};
    const auto kind = rng.uniform_below(20);
    if (kind < 14) {
      t.recurrence = RecurrenceSpec{Frequency::Weekly, 1, {}, {}, {}, false};
    } else if (kind < 17) {
      t.recurrence = RecurrenceSpec{Frequency::Weekly, 2, {}, {}, {}, false};
    } else {
      t.occurrences = 8 + static_cast<unsigned>(rng.uniform_below(6));
    }
    p.events.push_back(t);
  }

  const std::vector<std::string> labels{"mother", "father", "boss", "colleague",
                                        "friend", "partner", "sibling", "neighbour"};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    char id[24];
    std::snprintf(id, sizeof id, "C%02zu", i + 1);
    p.contacts.push_back({id, labels[i], 0.5 + rng.uniform01() * 1.5});
  }
  p.contacts.push_back({"C09", "", 0.6});
  p.contacts.push_back({"C10", "", 0.4});

  auto concentrated = [&](Behavior main, double share) {
    BehaviorWeights w{};
    const auto other1 = static_cast<Behavior>((static_cast<unsigned>(main) + 1) % 3);
    const auto other2 = static_cast<Behavior>((static_cast<unsigned>(main) + 2) % 3);
    const double rest = 1.0 - share;
    const double split = rng.uniform01();
    w[static_cast<std::size_t>(main)] = share;
    w[static_cast<std::size_t>(other1)] = rest * split;
    w[static_cast<std::size_t>(other2)] = rest - rest * split;
    return w;
  };
  auto draw_behavior = [&] {
    const auto x = rng.uniform_below(100);
    return x < 45 ? Behavior::Reject : (x < 85 ? Behavior::Accept : Behavior::Missed);
  };

  std::vector<Behavior> base(names.size());
  for (auto& b : base) b = draw_behavior();
  const auto table = default_keyword_table();
  bool deviates = false;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (base[i] != table.lookup(names[i]).value_or(table.default_behavior())) deviates = true;
  if (!deviates) base[0] = base[0] == Behavior::Reject ? Behavior::Accept : Behavior::Reject;

  // Relationship-specific exceptions come first so they take precedence.
  const auto n_exceptions = 1 + rng.uniform_below(2);
  for (std::uint64_t k = 0; k < n_exceptions; ++k) {
    const auto ev = rng.uniform_below(names.size());
    const auto& who = labels[rng.uniform_below(3)];  // mother, father or boss
    const Behavior b = base[ev] == Behavior::Accept ? Behavior::Reject : Behavior::Accept;
    p.behavior_policy.push_back({{names[ev], std::nullopt, who}, concentrated(b, 0.95)});
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double share = 0.85 + 0.12 * rng.uniform01();
    p.behavior_policy.push_back({{names[i], std::nullopt, std::nullopt}, concentrated(base[i], share)});
  }
  return p;
}

/// Hand-built bundle whose mapped rows reproduce the reference association
/// generation tree: Lecture 42/42 Reject, Meeting 34/40 Reject with boss 3/3
/// Accept, recurring Seminar 23/25 Accept, one-off Seminar 19/20 Missed.
inline Bundle reference_fixture() {
  using namespace std::chrono;
  const Date monday = sys_days{2016y / February / 1};
  std::vector<CalendarEvent> events;
  auto event = [&](std::string uid, std::string name, Date d, int start_h, int end_h,
                   std::optional<RecurrenceSpec> rr) {
    CalendarEvent ev;
    ev.uid = std::move(uid);
    ev.name = std::move(name);
    ev.start = DateTime{d} + hours{start_h};
    ev.end = DateTime{d} + hours{end_h};
    ev.start_tzid = ev.end_tzid = "Australia/Sydney";
    ev.status = "CONFIRMED";
    ev.recurrence = std::move(rr);
    events.push_back(ev);
  };
  event("ref-lecture@calbehav", "Lecture", monday, 9, 11,
        RecurrenceSpec{Frequency::Weekly, 1, {Monday}, 12u, {}, false});
  event("ref-meeting@calbehav", "Meeting", monday + days{1}, 10, 12,
        RecurrenceSpec{Frequency::Weekly, 1, {Tuesday}, 10u, {}, false});
  event("ref-seminar@calbehav", "Seminar", monday + days{2}, 14, 15,
        RecurrenceSpec{Frequency::Weekly, 2, {Wednesday}, 6u, {}, false});
  for (int k = 0; k < 5; ++k)
    event("ref-seminar-" + std::to_string(k + 1) + "@calbehav", "Seminar", monday + days{9 + 14 * k}, 14, 15,
          std::nullopt);

  const std::vector<std::pair<std::string, std::string>> contacts{
      {"C01", "boss"},    {"C02", "colleague"}, {"C03", "student"}, {"C04", "friend"},
      {"C05", "mother"},  {"C06", "father"},    {"C07", "sibling"}, {"C08", "partner"},
      {"C09", "neighbour"}, {"C10", "cousin"},  {"C11", "classmate"}, {"C12", "aunt"}};

  struct Group {
    Behavior behavior;
    std::string contact;
    int count;
  };
  std::vector<CallRecord> calls;
  auto place = [&](const std::vector<DateTime>& starts, const std::vector<Group>& groups) {
    std::vector<int> used(starts.size(), 0);
    std::size_t j = 0;
    for (const auto& g : groups) {
      for (int i = 0; i < g.count; ++i, ++j) {
        const auto o = j % starts.size();
        const DateTime at = starts[o] + minutes{5 + 7 * used[o]++};
        CallRecord r;
        r.timestamp = at;
        r.contact = g.contact;
        r.call_type = g.behavior == Behavior::Missed ? CallType::Missed : CallType::Incoming;
        r.duration_sec = g.behavior == Behavior::Accept ? static_cast<std::uint32_t>(30 + j) : 0;
        calls.push_back(std::move(r));
      }
    }
  };
  auto starts_of = [&](std::string_view name, EventType type) {
    std::vector<DateTime> out;
    for (const auto& occ : expand_all(events, {monday, monday + weeks{20}}))
      if (occ.event_name == name && occ.event_type == type) out.push_back(occ.start());
    return out;
  };

  place(starts_of("Lecture", EventType::Recurring), {{Behavior::Reject, "C03", 42}});
  std::vector<Group> meeting{{Behavior::Reject, "C02", 17}, {Behavior::Missed, "C02", 3},
                             {Behavior::Accept, "C01", 3}};
  for (int k = 0; k < 9; ++k) meeting.push_back({Behavior::Reject, contacts[3 + k].first, k < 8 ? 2 : 1});
  place(starts_of("Meeting", EventType::Recurring), meeting);
  place(starts_of("Seminar", EventType::Recurring),
        {{Behavior::Accept, "C02", 23}, {Behavior::Reject, "C02", 1}, {Behavior::Missed, "C02", 1}});
  place(starts_of("Seminar", EventType::NonRecurring), {{Behavior::Missed, "C02", 19}, {Behavior::Reject, "C02", 1}});

  // Calls the mapping must ignore: outgoing ones and one outside every event.
  calls.push_back({DateTime{monday + days{5}} + hours{12}, CallType::Incoming, 95, "C04", 0});
  calls.push_back({DateTime{monday} + hours{9} + minutes{2}, CallType::Outgoing, 40, "C02", 0});
  calls.push_back({DateTime{monday + days{1}} + hours{11}, CallType::Outgoing, 0, "C01", 0});
  std::stable_sort(calls.begin(), calls.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  RelationshipMap rels;
  for (const auto& [id, label] : contacts) rels.insert(id, label);

  Bundle b;
  b.text.calendar_ics = serialize_icalendar(events);
  b.text.call_log_csv = serialize_call_log(calls);
  b.text.relationships_csv = serialize_relationships(rels);
  b.truth_json = R"({"fixture": "association-generation-tree reference", "min_confidence": 0.8})"
                 "\n";
  return b;
}

}  // namespace calbehav
