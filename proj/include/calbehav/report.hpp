#pragma once

// JSON / CSV / plot-data renderings of rules, trees and metrics.

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "calbehav/baselines.hpp"
#include "calbehav/calendar.hpp"
#include "calbehav/evaluation.hpp"
#include "calbehav/miner.hpp"

namespace calbehav {

using nlohmann::json;

namespace report_detail {

inline std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace report_detail

inline json to_json(const Ratio& r) {
  return {{"numerator", r.num}, {"denominator", r.den}, {"percent", r.percent()}};
}

inline json to_json(const BehavioralRule& r) {
  json ante = json::array();
  for (const auto& c : r.antecedent) ante.push_back({{"attribute", to_string(c.attribute)}, {"value", c.value}});
  return {{"antecedent", ante},
          {"consequent", to_string(r.consequent)},
          {"support_count", r.support_count},
          {"antecedent_count", r.antecedent_count},
          {"confidence_ratio", {{"numerator", r.confidence.num}, {"denominator", r.confidence.den}}},
          {"confidence_pct", r.confidence.percent()},
          {"node", r.node_id}};
}

inline json rules_to_json(const std::vector<BehavioralRule>& rules) {
  json out = json::array();
  for (const auto& r : rules) out.push_back(to_json(r));
  return out;
}

inline BehavioralRule rule_from_json(const json& j) {
  BehavioralRule r;
  for (const auto& c : j.at("antecedent")) {
    auto a = parse_attribute(c.at("attribute").get<std::string>());
    if (!a) throw InputError("unknown attribute in rule");
    r.antecedent.push_back({*a, c.at("value").get<std::string>()});
  }
  auto b = parse_behavior(j.at("consequent").get<std::string>());
  if (!b) throw InputError("unknown consequent in rule");
  r.consequent = *b;
  r.support_count = j.at("support_count").get<std::uint64_t>();
  r.antecedent_count = j.value("antecedent_count", std::uint64_t{0});
  r.confidence = {j.at("confidence_ratio").at("numerator").get<std::uint64_t>(),
                  j.at("confidence_ratio").at("denominator").get<std::uint64_t>()};
  r.node_id = j.value("node", std::size_t{0});
  return r;
}

inline json to_json(const AGTNode& n) {
  json path = json::array();
  for (const auto& c : n.context_path) path.push_back({{"attribute", to_string(c.attribute)}, {"value", c.value}});
  json counts = json::object();
  for (auto b : kBehaviors) counts[std::string(to_string(b))] = n.distribution.count(b);
  json j{{"id", n.id},
         {"path", path},
         {"counts", counts},
         {"support_count", n.support_count},
         {"dominant", to_string(n.dominant)},
         {"confidence", to_json(n.confidence)},
         {"redundant", n.redundant}};
  if (n.split) j["split"] = to_string(*n.split);
  json kids = json::array();
  for (const auto& c : n.children) kids.push_back(to_json(c));
  j["children"] = kids;
  return j;
}

inline json to_json(const MiningResult& m) {
  json order = json::array();
  for (auto a : m.precedence) order.push_back(to_string(a));
  return {{"precedence", order}, {"tree", to_json(m.root)}};
}

inline json to_json(const ErrorTally& t) {
  return {{"matched", t.matched},
          {"incorrect", t.incorrect},
          {"uncovered", t.uncovered},
          {"error_rate", report_detail::optional_number(t.rate())}};
}

inline json to_json(const MetricsReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    json fj = to_json(f.tally);
    fj["fold"] = f.index;
    fj["train_size"] = f.train_size;
    fj["test_size"] = f.test_size;
    fj["rule_count"] = f.rule_count;
    folds.push_back(fj);
  }
  json rules = json::array();
  for (const auto& m : r.rules) {
    json rj = to_json(m.rule);
    rj["accuracy"] = report_detail::optional_number(m.accuracy);
    rj["coverage"] = m.coverage;
    rules.push_back(rj);
  }
  return {{"method", r.method},
          {"rule_count", r.rule_count},
          {"rules", rules},
          {"folds", folds},
          {"error_rate", report_detail::optional_number(r.error_rate)},
          {"uncovered_rate", r.uncovered_rate}};
}

/// One row per method and fold, plus a "mean" row per method.
inline std::string metrics_csv(const std::vector<MetricsReport>& reports, const std::string& user = {}) {
  std::string out = user.empty() ? "" : "user,";
  out += "method,fold,error_rate,uncovered,matched,incorrect,rule_count\n";
  const std::string prefix = user.empty() ? "" : user + ",";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      const auto e = f.tally.rate();
      out += prefix + r.method + ',' + std::to_string(f.index) + ',' + (e ? report_detail::fixed(*e) : "") +
             ',' + std::to_string(f.tally.uncovered) + ',' + std::to_string(f.tally.matched) + ',' +
             std::to_string(f.tally.incorrect) + ',' + std::to_string(f.rule_count) + '\n';
    }
    out += prefix + r.method + ",mean," + (r.error_rate ? report_detail::fixed(*r.error_rate) : "") + ",,,," +
           std::to_string(r.rule_count) + '\n';
  }
  return out;
}

inline std::string metrics_table(const std::vector<MetricsReport>& reports) {
  std::string out = "method      error%   uncovered%  rules\n";
  for (const auto& r : reports) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s %8s %10s %7zu\n", r.method.c_str(),
                  r.error_rate ? report_detail::fixed(*r.error_rate, 2).c_str() : "n/a",
                  report_detail::fixed(r.uncovered_rate, 2).c_str(), r.rule_count);
    out += buf;
  }
  return out;
}

inline json to_json(const TradeoffPoint& p) {
  return {{"threshold", p.threshold},
          {"rule_count", p.rule_count},
          {"coverage", p.coverage},
          {"mean_accuracy", report_detail::optional_number(p.mean_accuracy)},
          {"min_confidence", p.min_confidence ? to_json(*p.min_confidence) : json(nullptr)}};
}

/// Whitespace-separated columns for gnuplot; undefined values print as NaN.
inline std::string tradeoff_dat(const std::vector<TradeoffPoint>& points) {
  std::string out = "# threshold coverage mean_accuracy min_confidence rule_count\n";
  for (const auto& p : points) {
    out += report_detail::fixed(p.threshold, 2) + ' ' + report_detail::fixed(p.coverage) + ' ' +
           (p.mean_accuracy ? report_detail::fixed(*p.mean_accuracy) : "NaN") + ' ' +
           (p.min_confidence ? report_detail::fixed(100.0 * p.min_confidence->value()) : "NaN") + ' ' +
           std::to_string(p.rule_count) + '\n';
  }
  return out;
}

inline json to_json(const KeywordRuleTable& t) {
  json kw = json::object();
  for (const auto& [k, b] : t.keywords()) kw[k] = to_string(b);
  return {{"keywords", kw}, {"default", to_string(t.default_behavior())}};
}

/// {"keywords": {"meeting": "Reject", ...}, "default": "Accept"}
inline KeywordRuleTable keyword_table_from_json(const json& j) {
  try {
    auto def = parse_behavior(j.value("default", std::string("Accept")));
    if (!def) throw InputError("keyword table: unknown default behavior");
    KeywordRuleTable t(*def);
    for (const auto& [k, v] : j.at("keywords").items()) {
      auto b = parse_behavior(v.get<std::string>());
      if (!b) throw InputError("keyword table: unknown behavior for '" + k + "'");
      if (!t.add(k, *b)) throw InputError("keyword table: duplicate keyword '" + k + "'");
    }
    return t;
  } catch (const json::exception& e) {
    throw InputError(std::string("keyword table: ") + e.what());
  }
}

inline json to_json(const EventOccurrence& o) {
  return {{"uid", o.event_uid},
          {"name", o.event_name},
          {"date", format_date(o.date)},
          {"weekday", weekday_name(std::chrono::weekday{o.date})},
          {"start", format_time(o.start_time)},
          {"end", format_time(o.end_time)},
          {"event_type", to_string(o.event_type)}};
}

inline std::string occurrences_text(const std::vector<EventOccurrence>& occ) {
  std::string out;
  for (const auto& o : occ) {
    out += format_date(o.date) + ' ' + std::string(weekday_name(std::chrono::weekday{o.date})) + ' ' +
           format_time(o.start_time) + '-' + format_time(o.end_time) + ' ' + o.event_name + " (" +
           std::string(to_string(o.event_type)) + ")\n";
  }
  return out;
}

}  // namespace calbehav
