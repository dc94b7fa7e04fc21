#include <gtest/gtest.h>

#include <set>

#include "calbehav/miner.hpp"
#include "calbehav/pipeline.hpp"
#include "calbehav/synth.hpp"

using namespace calbehav;
using namespace std::chrono;

namespace {

DateRange span2016() { return {sys_days{2016y / January / 4}, sys_days{2017y / January / 1}}; }

EventTemplate weekly(std::string name, weekday wd, int from_h, int to_h, unsigned interval = 1) {
  EventTemplate t;
  t.name = std::move(name);
  t.weekday = wd;
  t.start = hours{from_h};
  t.end = hours{to_h};
  RecurrenceSpec r;
  r.frequency = Frequency::Weekly;
  r.interval = interval;
  t.recurrence = r;
  return t;
}

UserProfile seminar_profile(double p_reject, double noise) {
  UserProfile p;
  p.seed = 11;
  p.noise = noise;
  p.contacts = {{"C1", "boss", 1}, {"C2", "friend", 1}};
  p.events = {weekly("Seminar", Wednesday, 14, 16, 2)};
  p.behavior_policy = {{{"Seminar", std::nullopt, std::nullopt}, {p_reject, 1 - p_reject, 0}}};
  return p;
}

}  // namespace

TEST(Synth, ObservedFractionTracksPolicy) {
  const auto ds = build_dataset(generate_bundle(seminar_profile(0.95, 0.0), span2016()).text);
  ASSERT_TRUE(ds.diagnostics.empty());
  std::size_t occurrences = 0;
  for (const auto& e : ds.events) occurrences += expand_occurrences(e, span2016()).size();
  EXPECT_EQ(occurrences, 26u);
  std::size_t reject = 0;
  for (const auto& r : ds.instances) reject += r.behavior == Behavior::Reject;
  ASSERT_GT(ds.instances.size(), 50u);
  const double frac = static_cast<double>(reject) / static_cast<double>(ds.instances.size());
  EXPECT_NEAR(frac, 0.95, 0.07);
}

TEST(Synth, ZeroNoiseReproducesDegeneratePolicy) {
  const auto ds = build_dataset(generate_bundle(seminar_profile(1.0, 0.0), span2016()).text);
  ASSERT_FALSE(ds.instances.empty());
  for (const auto& r : ds.instances) EXPECT_EQ(r.behavior, Behavior::Reject);
}

TEST(Synth, SameSeedSameBytes) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto a = generate_bundle(heterogeneous_profile(seed), span2016());
    const auto b = generate_bundle(heterogeneous_profile(seed), span2016());
    EXPECT_EQ(a.text.calendar_ics, b.text.calendar_ics);
    EXPECT_EQ(a.text.call_log_csv, b.text.call_log_csv);
    EXPECT_EQ(a.text.relationships_csv, b.text.relationships_csv);
    EXPECT_EQ(a.truth_json, b.truth_json);
  }
  EXPECT_NE(generate_bundle(heterogeneous_profile(1), span2016()).text.call_log_csv,
            generate_bundle(heterogeneous_profile(2), span2016()).text.call_log_csv);
}

TEST(Synth, BundlesParseCleanly) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto b = generate_bundle(heterogeneous_profile(seed), span2016());
    const auto ds = build_dataset(b.text);
    EXPECT_TRUE(ds.diagnostics.empty()) << "seed " << seed;
    EXPECT_GT(ds.instances.size(), 100u);
    EXPECT_LT(ds.classified.size(), ds.calls.size());  // outgoing calls present
    EXPECT_NE(b.text.calendar_ics.find("X-CALBEHAV-SEED:" + std::to_string(seed)), std::string::npos);
  }
}

TEST(Synth, TruthCountsMatchMappedRows) {
  const auto b = generate_bundle(seminar_profile(0.7, 0.05), span2016());
  const auto truth = nlohmann::json::parse(b.truth_json);
  const auto ds = build_dataset(b.text);
  std::uint64_t total = 0;
  for (const auto& [event, by_rel] : truth["observed"].items())
    for (const auto& [rel, by_b] : by_rel.items())
      for (const auto& [beh, n] : by_b.items()) total += static_cast<std::uint64_t>(n);
  EXPECT_EQ(total, ds.instances.size());
}

TEST(Synth, ZeroNoiseMinedRulesFollowPolicy) {
  UserProfile p;
  p.seed = 3;
  p.contacts = {{"C1", "boss", 1}, {"C2", "mother", 1}};
  p.events = {weekly("Meeting", Monday, 9, 11), weekly("Gym", Thursday, 18, 19)};
  p.behavior_policy = {{{"Meeting", std::nullopt, std::nullopt}, {1, 0, 0}},
                       {{"Gym", std::nullopt, std::nullopt}, {0, 0, 1}}};
  const auto ds = build_dataset(generate_bundle(p, span2016()).text);
  const auto m = mine_rules(ds.instances, MiningConfig{});
  ASSERT_EQ(m.rules.size(), 2u);
  for (const auto& r : m.rules) {
    ASSERT_EQ(r.antecedent.size(), 1u);
    EXPECT_EQ(r.antecedent[0].attribute, Attribute::EventName);
    EXPECT_EQ(r.consequent, r.antecedent[0].value == "Meeting" ? Behavior::Reject : Behavior::Missed);
    EXPECT_EQ(r.confidence.num, r.confidence.den);
  }
}

TEST(Synth, UnmappedContactsBecomeUnknown) {
  UserProfile p = seminar_profile(1.0, 0.0);
  p.contacts = {{"C9", "", 1}};
  const auto b = generate_bundle(p, span2016());
  EXPECT_EQ(b.text.relationships_csv, "contact,relationship\n");
  const auto ds = build_dataset(b.text);
  ASSERT_FALSE(ds.instances.empty());
  for (const auto& r : ds.instances) EXPECT_EQ(r.context.relationship, "unknown");
}

TEST(Synth, OneOffTemplatesLandOnDistinctDays) {
  UserProfile p = seminar_profile(1.0, 0.0);
  EventTemplate t;
  t.name = "Workshop";
  t.weekday = Friday;
  t.start = hours{10};
  t.end = hours{12};
  t.occurrences = 9;
  p.events = {t};
  const auto ds = build_dataset(generate_bundle(p, span2016()).text);
  ASSERT_EQ(ds.events.size(), 9u);
  std::set<Date> days;
  for (const auto& e : ds.events) {
    EXPECT_FALSE(e.recurrence);
    EXPECT_EQ(std::chrono::weekday(date_of(e.start)), Friday);
    days.insert(date_of(e.start));
  }
  EXPECT_EQ(days.size(), 9u);
}

TEST(Profile, JsonRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = heterogeneous_profile(seed);
    const auto j = profile_to_json(p);
    EXPECT_EQ(profile_to_json(profile_from_json(j)), j);
    EXPECT_EQ(generate_bundle(profile_from_json(j), span2016()).text.call_log_csv,
              generate_bundle(p, span2016()).text.call_log_csv);
  }
}

TEST(Profile, ValidationErrors) {
  auto bad = seminar_profile(0.9, 0.0);
  bad.behavior_policy[0].distribution = {0.5, 0.6, 0};
  EXPECT_THROW(bad.validate(), InputError);
  bad = seminar_profile(0.9, 0.5);
  EXPECT_THROW(bad.validate(), InputError);
  bad = seminar_profile(0.9, 0.0);
  bad.contacts.clear();
  EXPECT_THROW(bad.validate(), InputError);
  bad = seminar_profile(0.9, 0.0);
  bad.call_rate = 0;
  EXPECT_THROW(bad.validate(), InputError);
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(R"({"contacts":[]})")), InputError);
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(
                   R"({"contacts":[{"id":"a"}],"events":[{"name":"x","weekday":"XX","start":"09:00","end":"10:00"}]})")),
               InputError);
  EXPECT_NO_THROW(profile_from_json(nlohmann::json::parse(
      R"({"contacts":[{"id":"a"}],"events":[{"name":"x","weekday":"MO","start":"09:00","end":"10:00"}]})")));
}

TEST(ReferenceFixture, InstanceCountAndTree) {
  const auto ds = build_dataset(reference_fixture().text);
  EXPECT_TRUE(ds.diagnostics.empty());
  EXPECT_EQ(ds.instances.size(), 127u);
  EXPECT_EQ(mine_rules(ds.instances, MiningConfig{}).rules.size(), 5u);
}
