#include <gtest/gtest.h>

#include "calbehav/core.hpp"

using namespace calbehav;
using namespace std::chrono;

TEST(Ratio, ComparesExactlyAcrossDenominators) {
  EXPECT_EQ((Ratio{17, 20}), (Ratio{34, 40}));
  EXPECT_LT((Ratio{23, 25}), (Ratio{19, 20}));
  EXPECT_GT((Ratio{1, 1}), (Ratio{999999, 1000000}));
}

TEST(Ratio, PercentRoundsHalfUp) {
  EXPECT_EQ((Ratio{17, 20}.percent()), 85u);
  EXPECT_EQ((Ratio{23, 25}.percent()), 92u);
  EXPECT_EQ((Ratio{19, 20}.percent()), 95u);
  EXPECT_EQ((Ratio{1, 8}.percent()), 13u);  // 12.5
  EXPECT_EQ((Ratio{2, 3}.percent()), 67u);
  EXPECT_EQ((Ratio{1, 3}.percent()), 33u);
}

TEST(Threshold, ConvertsToMillionths) {
  EXPECT_EQ(threshold_ratio(0.8), (Ratio{4, 5}));
  EXPECT_EQ(threshold_ratio(1.0), (Ratio{1, 1}));
  EXPECT_TRUE((Ratio{4, 5}) >= threshold_ratio(0.8));
  EXPECT_FALSE((Ratio{79, 100}) >= threshold_ratio(0.8));
  EXPECT_THROW(threshold_ratio(0.0), ContractViolation);
  EXPECT_THROW(threshold_ratio(1.01), ContractViolation);
  EXPECT_THROW(threshold_ratio(-0.5), ContractViolation);
}

TEST(Behavior, ParsesCaseInsensitively) {
  EXPECT_EQ(parse_behavior("reject"), Behavior::Reject);
  EXPECT_EQ(parse_behavior("Accept"), Behavior::Accept);
  EXPECT_EQ(parse_behavior("MISSED"), Behavior::Missed);
  EXPECT_FALSE(parse_behavior("busy"));
  for (auto b : kBehaviors) EXPECT_EQ(parse_behavior(to_string(b)), b);
}

TEST(Attribute, NamesRoundTrip) {
  for (auto a : kAttributes) EXPECT_EQ(parse_attribute(to_string(a)), a);
  EXPECT_FALSE(parse_attribute("location"));
}

TEST(Dates, ParseAndFormat) {
  const auto t = parse_datetime("2016-09-10 19:38:20");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_datetime(*t), "2016-09-10 19:38:20");
  EXPECT_EQ(date_of(*t), sys_days{2016y / September / 10});
  EXPECT_EQ(time_of(*t), hours{19} + minutes{38} + seconds{20});
  EXPECT_FALSE(parse_datetime("2016-09-10T19:38:20"));
  EXPECT_FALSE(parse_datetime("2016-02-30 10:00:00"));
  EXPECT_FALSE(parse_datetime("2016-09-10 24:00:00"));
  EXPECT_FALSE(parse_date("16-09-10"));
  EXPECT_TRUE(parse_date("2016-02-29"));
  EXPECT_FALSE(parse_date("2015-02-29"));
}

TEST(Dates, TimeFormatting) {
  EXPECT_EQ(format_time(hours{8}), "08:00");
  EXPECT_EQ(format_time(hours{24}), "24:00");
  EXPECT_EQ(format_time(hours{8} + seconds{5}), "08:00:05");
}

TEST(Weekdays, CodesAndNames) {
  EXPECT_EQ(weekday_code(Thursday), "TH");
  EXPECT_EQ(weekday_name(Thursday), "Thursday");
  EXPECT_EQ(parse_weekday_code("SU"), Sunday);
  EXPECT_FALSE(parse_weekday_code("th"));
}

TEST(Text, SplitLinesAcceptsCrlfAndLf) {
  const auto lines = split_lines("a\r\nb\nc");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(lines[2], "c");
  EXPECT_TRUE(split_lines("").empty());
  EXPECT_EQ(trim("  x \t"), "x");
}

TEST(DateRange, IsClosed) {
  DateRange r{sys_days{2016y / June / 1}, sys_days{2016y / June / 30}};
  EXPECT_TRUE(r.contains(r.first));
  EXPECT_TRUE(r.contains(r.last));
  EXPECT_FALSE(r.contains(r.last + days{1}));
}
