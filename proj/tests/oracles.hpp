#pragma once

// Brute-force reference implementations used only by the tests. They share
// data types with the library but none of its algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "calbehav/calbehav.hpp"

namespace oracle {

using namespace calbehav;

// ---- entropy / gain, straight from the formulas -------------------------

inline long double entropy_counts(const std::vector<std::uint64_t>& counts) {
  long double n = 0;
  for (auto c : counts) n += c;
  long double h = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    const long double p = c / n;
    h += -p * std::log2(p);
  }
  return h;
}

inline std::vector<std::uint64_t> class_counts(const std::vector<const EventBehaviorInstance*>& rows) {
  std::vector<std::uint64_t> c(3, 0);
  for (const auto* r : rows) c[static_cast<int>(r->behavior)]++;
  return c;
}

/// H(S) - sum_v |S_v|/|S| * H'(S_v) by explicit enumeration of the values of
/// the attribute. With min_support > 1, subsets below it score H(S).
inline long double gain(Attribute a, const std::vector<const EventBehaviorInstance*>& rows,
                        std::uint64_t min_support = 1) {
  std::vector<std::string> values;
  for (const auto* r : rows) {
    const auto v = r->context.value(a);
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  const long double parent = entropy_counts(class_counts(rows));
  long double rem = 0;
  for (const auto& v : values) {
    std::vector<const EventBehaviorInstance*> sub;
    for (const auto* r : rows)
      if (r->context.value(a) == v) sub.push_back(r);
    const long double w = static_cast<long double>(sub.size()) / rows.size();
    rem += w * (sub.size() >= min_support ? entropy_counts(class_counts(sub)) : parent);
  }
  return parent - rem;
}

inline std::vector<const EventBehaviorInstance*> pointers(const std::vector<EventBehaviorInstance>& rows) {
  std::vector<const EventBehaviorInstance*> out;
  for (const auto& r : rows) out.push_back(&r);
  return out;
}

/// Descending gain, ties (on a 1e-10 grid) in the fixed attribute order.
inline std::vector<Attribute> ranking(const std::vector<const EventBehaviorInstance*>& rows,
                                      const std::vector<Attribute>& candidates, std::uint64_t min_support) {
  std::vector<std::pair<long long, int>> key;
  for (auto a : candidates)
    key.emplace_back(-std::llround(static_cast<double>(gain(a, rows, min_support)) * 1e10), static_cast<int>(a));
  std::sort(key.begin(), key.end());
  std::vector<Attribute> out;
  for (auto& [g, a] : key) out.push_back(static_cast<Attribute>(a));
  return out;
}

// ---- rule enumeration -----------------------------------------------------

using Antecedent = std::map<Attribute, std::string>;

struct OracleRule {
  std::vector<Condition> antecedent;  // in attribute enum order
  Behavior consequent;
  std::uint64_t joint;
  std::uint64_t covered;

  auto key() const { return std::tie(antecedent, consequent, joint, covered); }
  friend bool operator<(const OracleRule& a, const OracleRule& b) { return a.key() < b.key(); }
  friend bool operator==(const OracleRule& a, const OracleRule& b) { return a.key() == b.key(); }
};

inline std::pair<Behavior, std::uint64_t> dominant_of(const std::vector<std::uint64_t>& c) {
  // Reject > Accept > Missed on ties
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (c[k] > c[best]) best = k;
  return {static_cast<Behavior>(best), c[best]};
}

/// True if the antecedent is a path the tree can take: starting from the
/// whole dataset, every step uses the first attribute (in precedence order)
/// that is not constant on the current subset and has some value with at
/// least min_support rows; every subset reached has at least min_support rows
/// and no non-root subset along the way, other than the last, is pure.
inline bool structured(const Antecedent& ante, const std::vector<const EventBehaviorInstance*>& all,
                       const std::vector<Attribute>& global, std::uint64_t min_support, bool per_node) {
  auto current = all;
  std::vector<Attribute> remaining(kAttributes.begin(), kAttributes.end());
  std::size_t used = 0;
  bool at_root = true;
  while (used < ante.size()) {
    const auto counts = class_counts(current);
    if (!at_root && dominant_of(counts).second == current.size()) return false;
    std::vector<Attribute> order;
    if (per_node) {
      order = ranking(current, remaining, min_support);
    } else {
      for (auto a : global)
        if (std::find(remaining.begin(), remaining.end(), a) != remaining.end()) order.push_back(a);
    }
    std::optional<Attribute> pick;
    for (auto a : order) {
      std::map<std::string, std::uint64_t> freq;
      for (const auto* r : current) freq[r->context.value(a)]++;
      if (freq.size() < 2) continue;
      bool any = false;
      for (auto& [v, n] : freq) any = any || n >= min_support;
      if (!any) continue;
      pick = a;
      break;
    }
    if (!pick) return false;
    auto it = ante.find(*pick);
    if (it == ante.end()) return false;
    std::vector<const EventBehaviorInstance*> next;
    for (const auto* r : current)
      if (r->context.value(*pick) == it->second) next.push_back(r);
    if (next.size() < min_support) return false;
    current = std::move(next);
    remaining.erase(std::find(remaining.begin(), remaining.end(), *pick));
    ++used;
    at_root = false;
  }
  return true;
}

/// Apriori-style exhaustive enumeration of every non-empty antecedent over the
/// observed attribute values, restricted to tree-structured antecedents, then
/// filtered for redundancy: a candidate is dropped when a strict subset with
/// the same consequent is also a candidate and has confidence at least as
/// high. Candidates need |S(A)| >= min_support and confidence >= threshold;
/// surviving rules additionally need joint support >= min_support.
inline std::vector<OracleRule> enumerate_rules(const std::vector<EventBehaviorInstance>& rows, double threshold,
                                               std::uint64_t min_support, bool per_node = false) {
  const auto all = pointers(rows);
  const auto global = ranking(all, {kAttributes.begin(), kAttributes.end()}, min_support);

  std::array<std::vector<std::string>, 4> domain;
  for (auto a : kAttributes) {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.context.value(a));
    domain[static_cast<int>(a)].assign(s.begin(), s.end());
  }

  struct Cand {
    Antecedent ante;
    Behavior cons;
    std::uint64_t joint, covered;
  };
  std::vector<Cand> cands;
  // odometer over (value or absent) for each attribute
  std::array<std::size_t, 4> pos{};
  for (;;) {
    Antecedent ante;
    for (int k = 0; k < 4; ++k)
      if (pos[k] > 0) ante[static_cast<Attribute>(k)] = domain[k][pos[k] - 1];
    if (!ante.empty()) {
      std::vector<const EventBehaviorInstance*> cov;
      for (const auto* r : all) {
        bool ok = true;
        for (auto& [a, v] : ante) ok = ok && r->context.value(a) == v;
        if (ok) cov.push_back(r);
      }
      if (cov.size() >= min_support && !cov.empty()) {
        auto [cons, joint] = dominant_of(class_counts(cov));
        // confidence >= threshold, exactly: joint * 1e6 >= round(threshold*1e6) * covered
        const auto t = static_cast<std::uint64_t>(std::llround(threshold * 1e6));
        if (joint * 1000000ULL >= t * cov.size() && structured(ante, all, global, min_support, per_node))
          cands.push_back({ante, cons, joint, cov.size()});
      }
    }
    int k = 0;
    while (k < 4 && ++pos[k] > domain[k].size()) pos[k++] = 0;
    if (k == 4) break;
  }

  auto strict_subset = [](const Antecedent& a, const Antecedent& b) {
    if (a.size() >= b.size()) return false;
    for (auto& [k, v] : a) {
      auto it = b.find(k);
      if (it == b.end() || it->second != v) return false;
    }
    return true;
  };

  std::vector<OracleRule> out;
  for (const auto& c : cands) {
    bool redundant = false;
    for (const auto& g : cands) {
      if (g.cons != c.cons || !strict_subset(g.ante, c.ante)) continue;
      // conf(c) <= conf(g)  <=>  c.joint * g.covered <= g.joint * c.covered
      if (c.joint * g.covered <= g.joint * c.covered) redundant = true;
    }
    if (redundant || c.joint < min_support) continue;
    OracleRule r{{}, c.cons, c.joint, c.covered};
    for (auto& [a, v] : c.ante) r.antecedent.push_back({a, v});
    out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<OracleRule> as_oracle(const std::vector<BehavioralRule>& rules) {
  std::vector<OracleRule> out;
  for (const auto& r : rules) {
    OracleRule o{r.antecedent, r.consequent, r.support_count, r.antecedent_count};
    std::sort(o.antecedent.begin(), o.antecedent.end(),
              [](const Condition& a, const Condition& b) { return a.attribute < b.attribute; });
    out.push_back(o);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- mapping --------------------------------------------------------------

/// Every (occurrence, call) pair with start <= t < end, as rows, in
/// (date, timestamp, occurrence start, occurrence index) order.
inline std::vector<EventBehaviorInstance> all_pairs_join(const std::vector<EventOccurrence>& occ,
                                                         const std::vector<ClassifiedCall>& calls,
                                                         const RelationshipMap& rel) {
  struct Hit {
    Date date;
    DateTime t;
    TimeOfDay start;
    std::size_t o;
    std::size_t c;
  };
  std::vector<Hit> hits;
  for (std::size_t o = 0; o < occ.size(); ++o)
    for (std::size_t c = 0; c < calls.size(); ++c) {
      const auto t = calls[c].record.timestamp;
      const DateTime s = DateTime{occ[o].date} + occ[o].start_time;
      const DateTime e = DateTime{occ[o].date} + occ[o].end_time;
      if (s <= t && t < e) hits.push_back({occ[o].date, t, occ[o].start_time, o, c});
    }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return std::tie(a.date, a.t, a.start, a.o) < std::tie(b.date, b.t, b.start, b.o);
  });
  std::vector<EventBehaviorInstance> out;
  for (const auto& h : hits) {
    const auto& o = occ[h.o];
    const auto wd = std::chrono::weekday{o.date};
    static const char* names[] = {"Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"};
    char span[32];
    std::snprintf(span, sizeof span, "[%02d:%02d-%02d:%02d]", static_cast<int>(o.start_time.count() / 3600),
                  static_cast<int>(o.start_time.count() / 60 % 60), static_cast<int>(o.end_time.count() / 3600),
                  static_cast<int>(o.end_time.count() / 60 % 60));
    ContextVector cv{o.event_name, o.event_type, std::string(names[wd.c_encoding()]) + span,
                     rel.resolve(calls[h.c].record.contact)};
    out.push_back({cv, calls[h.c].behavior, calls[h.c].record.timestamp});
  }
  return out;
}

// ---- best match -----------------------------------------------------------

/// Linear scan keeping the covering rule that is greatest under
/// (antecedent size, confidence, support), first one wins on full ties.
inline std::optional<std::size_t> best_match(const std::vector<BehavioralRule>& rules, const ContextVector& ctx) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    bool covers = true;
    for (const auto& c : rules[i].antecedent) covers = covers && ctx.value(c.attribute) == c.value;
    if (!covers) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = rules[i];
    const auto& b = rules[*best];
    // cross-multiplied confidence comparison
    const auto ca = a.confidence.num * b.confidence.den;
    const auto cb = b.confidence.num * a.confidence.den;
    if (std::make_tuple(a.antecedent.size(), ca, a.support_count) >
        std::make_tuple(b.antecedent.size(), cb, b.support_count))
      best = i;
  }
  return best;
}

// ---- random corpora -------------------------------------------------------

/// Small random event-behavior table: a few values per attribute and
/// behaviors biased by event name so that rules exist.
inline std::vector<EventBehaviorInstance> random_rows(Rng& rng, std::size_t n) {
  static const char* names[] = {"Meeting", "Lecture", "Seminar", "Gym"};
  static const char* slots[] = {"Monday[09:00-10:00]", "Tuesday[14:00-16:00]", "Friday[11:00-12:00]"};
  static const char* rels[] = {"boss", "mother", "friend", "unknown"};
  const auto n_names = 2 + rng.uniform_below(3);
  std::vector<std::array<double, 3>> bias;
  for (std::size_t i = 0; i < 4; ++i) {
    std::array<double, 3> w{rng.uniform01() + 0.05, rng.uniform01() + 0.05, rng.uniform01() + 0.05};
    w[rng.uniform_below(3)] += 2.0 * rng.uniform01();
    bias.push_back(w);
  }
  std::vector<EventBehaviorInstance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    EventBehaviorInstance r;
    const auto e = rng.uniform_below(n_names);
    r.context.event_name = names[e];
    r.context.event_type = rng.bernoulli(0.6) ? EventType::Recurring : EventType::NonRecurring;
    r.context.day_time = slots[rng.uniform_below(3)];
    r.context.relationship = rels[rng.uniform_below(4)];
    auto w = bias[e];
    if (r.context.relationship == "boss") w[1] += 1.0;
    r.behavior = static_cast<Behavior>(rng.pick_weighted({w.begin(), w.end()}));
    r.source_timestamp = DateTime{std::chrono::seconds{1450000000 + static_cast<long long>(i) * 3600}};
    rows.push_back(r);
  }
  return rows;
}

}  // namespace oracle
