#pragma once

// Behavioral rule mining over event-behavior rows.
//
// Contexts are ranked by information gain, an association generation tree is
// grown top-down in that precedence order, nodes that add no confidence over
// a qualifying ancestor with the same dominant behavior are marked redundant,
// and rules are read off the remaining nodes that meet the user's threshold.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "calbehav/core.hpp"
#include "calbehav/mapping.hpp"

namespace calbehav {

struct BehaviorDistribution {
  std::array<std::uint64_t, 3> counts{};

  void add(Behavior b) { ++counts[static_cast<std::size_t>(b)]; }
  [[nodiscard]] std::uint64_t count(Behavior b) const { return counts[static_cast<std::size_t>(b)]; }
  [[nodiscard]] std::uint64_t total() const { return counts[0] + counts[1] + counts[2]; }

  friend bool operator==(const BehaviorDistribution&, const BehaviorDistribution&) = default;
};

inline BehaviorDistribution distribution_of(std::span<const EventBehaviorInstance> rows) {
  BehaviorDistribution d;
  for (const auto& r : rows) d.add(r.behavior);
  return d;
}

/// Shannon entropy in bits; 0 log 0 is taken as 0.
inline double entropy(const BehaviorDistribution& d) {
  const auto n = d.total();
  if (n == 0) throw ContractViolation("entropy of an empty distribution");
  double h = 0.0;
  for (auto c : d.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  return h;
}

inline double entropy(std::span<const EventBehaviorInstance> rows) {
  if (rows.empty()) throw ContractViolation("entropy of an empty instance list");
  return entropy(distribution_of(rows));
}

namespace miner_detail {

inline std::map<std::string, BehaviorDistribution> split_counts(
    Attribute a, std::span<const EventBehaviorInstance> rows) {
  std::map<std::string, BehaviorDistribution> groups;
  for (const auto& r : rows) groups[r.context.value(a)].add(r.behavior);
  return groups;
}

/// Gains are compared on a 1e-10 grid so that mathematically equal gains
/// (identical partitions summed in a different order) tie exactly.
inline std::int64_t quantize(double gain) { return std::llround(gain * 1e10); }

}  // namespace miner_detail

/// Information gain of splitting rows by an attribute.
inline double information_gain(Attribute a, std::span<const EventBehaviorInstance> rows) {
  if (rows.empty()) throw ContractViolation("information gain of an empty instance list");
  const double n = static_cast<double>(rows.size());
  double remainder = 0.0;
  for (const auto& [value, dist] : miner_detail::split_counts(a, rows))
    remainder += static_cast<double>(dist.total()) / n * entropy(dist);
  return std::max(0.0, entropy(rows) - remainder);
}

/// Information gain in which subsets smaller than min_support are treated as
/// carrying no information (they contribute the parent entropy). With
/// min_support = 1 this is plain information gain. Unlike plain gain it can
/// be negative.
inline double support_aware_gain(Attribute a, std::span<const EventBehaviorInstance> rows,
                                 std::uint64_t min_support) {
  if (rows.empty()) throw ContractViolation("information gain of an empty instance list");
  if (min_support <= 1) return information_gain(a, rows);
  const double n = static_cast<double>(rows.size());
  const double parent = entropy(rows);
  double remainder = 0.0;
  for (const auto& [value, dist] : miner_detail::split_counts(a, rows)) {
    const double w = static_cast<double>(dist.total()) / n;
    remainder += w * (dist.total() >= min_support ? entropy(dist) : parent);
  }
  return parent - remainder;
}

/// Orders candidate attributes by descending gain. Ties keep the fixed order
/// event_name, event_type, day_time, relationship.
inline std::vector<Attribute> rank_contexts(std::span<const EventBehaviorInstance> rows,
                                            std::span<const Attribute> candidates,
                                            std::uint64_t min_support = 1) {
  if (rows.empty()) throw ContractViolation("cannot rank contexts of an empty instance list");
  std::vector<std::pair<std::int64_t, Attribute>> scored;
  for (auto a : candidates)
    scored.emplace_back(miner_detail::quantize(support_aware_gain(a, rows, min_support)), a);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return static_cast<int>(x.second) < static_cast<int>(y.second);
  });
  std::vector<Attribute> out;
  for (const auto& [g, a] : scored) out.push_back(a);
  return out;
}

inline std::vector<Attribute> rank_contexts(std::span<const EventBehaviorInstance> rows,
                                            std::uint64_t min_support = 1) {
  return rank_contexts(rows, kAttributes, min_support);
}

struct Dominant {
  Behavior behavior = Behavior::Reject;
  Ratio confidence;
};

/// Most frequent class and its share. Ties resolve Reject > Accept > Missed.
inline Dominant dominant_behavior(const BehaviorDistribution& d) {
  if (d.total() == 0) throw ContractViolation("dominant behavior of an empty distribution");
  Behavior best = Behavior::Reject;
  for (auto b : kBehaviors)
    if (d.count(b) > d.count(best)) best = b;
  return {best, Ratio{d.count(best), d.total()}};
}

struct Condition {
  Attribute attribute = Attribute::EventName;
  std::string value;

  friend bool operator==(const Condition&, const Condition&) = default;
  friend auto operator<=>(const Condition&, const Condition&) = default;
};

inline std::string to_string(const Condition& c) {
  return std::string(to_string(c.attribute)) + "=" + c.value;
}

inline bool satisfies(const ContextVector& ctx, std::span<const Condition> antecedent) {
  for (const auto& c : antecedent)
    if (ctx.value(c.attribute) != c.value) return false;
  return true;
}

struct AGTNode {
  /// Breadth-first number; the root is 0 and its children start at 1.
  std::size_t id = 0;
  std::vector<Condition> context_path;
  BehaviorDistribution distribution;
  Behavior dominant = Behavior::Reject;
  Ratio confidence;
  /// Instances reaching this node (support of the antecedent alone).
  std::uint64_t support_count = 0;
  bool redundant = false;
  std::optional<Attribute> split;
  std::vector<AGTNode> children;
};

enum class PrecedenceMode { Global, PerNode };

inline constexpr std::string_view to_string(PrecedenceMode m) {
  return m == PrecedenceMode::Global ? "global" : "per-node";
}

struct MiningConfig {
  double min_confidence = 0.80;
  std::uint64_t min_support = 3;
  PrecedenceMode precedence = PrecedenceMode::Global;
};

struct BehavioralRule {
  std::vector<Condition> antecedent;
  Behavior consequent = Behavior::Reject;
  /// Instances matching antecedent and consequent together.
  std::uint64_t support_count = 0;
  /// Instances matching the antecedent.
  std::uint64_t antecedent_count = 0;
  Ratio confidence;
  std::size_t node_id = 0;

  [[nodiscard]] bool covers(const ContextVector& ctx) const { return satisfies(ctx, antecedent); }
};

inline std::string to_string(const BehavioralRule& r) {
  std::string s;
  for (std::size_t i = 0; i < r.antecedent.size(); ++i) {
    if (i) s += ", ";
    s += to_string(r.antecedent[i]);
  }
  return s + " => " + std::string(to_string(r.consequent)) + " (conf " +
         std::to_string(r.confidence.percent()) + "%, " + to_string(r.confidence) + ")";
}

namespace miner_detail {

struct AncestorStat {
  Behavior dominant;
  Ratio confidence;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const EventBehaviorInstance> rows, const MiningConfig& cfg)
      : rows_(rows), cfg_(cfg), threshold_(threshold_ratio(cfg.min_confidence)) {
    if (cfg.min_support == 0) throw ContractViolation("min_support must be at least 1");
    if (cfg_.precedence == PrecedenceMode::Global)
      global_order_ = rank_contexts(rows_, kAttributes, cfg_.min_support);
  }

  AGTNode build() {
    std::vector<std::size_t> all(rows_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    AGTNode root = make_node({}, all);
    std::vector<Attribute> remaining(kAttributes.begin(), kAttributes.end());
    std::vector<AncestorStat> chain;
    grow(root, all, remaining, chain, /*is_root=*/true);
    number(root);
    return root;
  }

  [[nodiscard]] const std::vector<Attribute>& global_order() const { return global_order_; }

 private:
  AGTNode make_node(std::vector<Condition> path, const std::vector<std::size_t>& idx) const {
    AGTNode n;
    n.context_path = std::move(path);
    for (auto i : idx) n.distribution.add(rows_[i].behavior);
    const auto dom = dominant_behavior(n.distribution);
    n.dominant = dom.behavior;
    n.confidence = dom.confidence;
    n.support_count = idx.size();
    return n;
  }

  std::vector<Attribute> order_for(const std::vector<std::size_t>& idx,
                                   const std::vector<Attribute>& remaining) const {
    if (cfg_.precedence == PrecedenceMode::Global) {
      std::vector<Attribute> out;
      for (auto a : global_order_)
        if (std::find(remaining.begin(), remaining.end(), a) != remaining.end()) out.push_back(a);
      return out;
    }
    std::vector<EventBehaviorInstance> subset;
    subset.reserve(idx.size());
    for (auto i : idx) subset.push_back(rows_[i]);
    return rank_contexts(subset, remaining, cfg_.min_support);
  }

  void grow(AGTNode& node, const std::vector<std::size_t>& idx, const std::vector<Attribute>& remaining,
            std::vector<AncestorStat>& chain, bool is_root) {
    // Pure non-root nodes are not elaborated; the root always is, since it
    // never yields a rule itself.
    if (!is_root && node.confidence.num == node.confidence.den) return;

    for (auto attr : order_for(idx, remaining)) {
      std::map<std::string, std::vector<std::size_t>> groups;
      for (auto i : idx) groups[rows_[i].context.value(attr)].push_back(i);
      if (groups.size() < 2) continue;  // constant here: cannot partition
      std::vector<std::pair<std::string, std::vector<std::size_t>>> kept;
      for (auto& [value, members] : groups)
        if (members.size() >= cfg_.min_support) kept.emplace_back(value, std::move(members));
      if (kept.empty()) continue;  // no value has enough evidence

      std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second.size() > b.second.size();
      });
      node.split = attr;
      std::vector<Attribute> rest;
      for (auto a : remaining)
        if (a != attr) rest.push_back(a);
      if (!is_root) chain.push_back({node.dominant, node.confidence});
      for (auto& [value, members] : kept) {
        auto path = node.context_path;
        path.push_back({attr, value});
        AGTNode child = make_node(std::move(path), members);
        child.redundant = is_redundant(child, chain);
        grow(child, members, rest, chain, false);
        node.children.push_back(std::move(child));
      }
      if (!is_root) chain.pop_back();
      return;
    }
  }

  [[nodiscard]] bool is_redundant(const AGTNode& child, const std::vector<AncestorStat>& chain) const {
    for (const auto& a : chain)
      if (a.dominant == child.dominant && a.confidence >= threshold_ && child.confidence <= a.confidence)
        return true;
    return false;
  }

  static void number(AGTNode& root) {
    std::deque<AGTNode*> queue{&root};
    std::size_t next = 0;
    while (!queue.empty()) {
      AGTNode* n = queue.front();
      queue.pop_front();
      n->id = next++;
      for (auto& c : n->children) queue.push_back(&c);
    }
  }

  std::span<const EventBehaviorInstance> rows_;
  MiningConfig cfg_;
  Ratio threshold_;
  std::vector<Attribute> global_order_;
};

}  // namespace miner_detail

/// Grows the association generation tree. Children are created per value of
/// the highest-precedence attribute that can partition the node: attributes
/// that are constant on the node, or whose every value falls below
/// min_support, are passed over. Children are ordered by descending size,
/// then by value.
inline AGTNode build_agt(std::span<const EventBehaviorInstance> rows, const MiningConfig& cfg) {
  if (rows.empty()) throw ContractViolation("cannot build a tree from an empty instance list");
  return miner_detail::TreeBuilder(rows, cfg).build();
}

inline void sort_rules(std::vector<BehavioralRule>& rules) {
  std::sort(rules.begin(), rules.end(), [](const BehavioralRule& a, const BehavioralRule& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.support_count != b.support_count) return a.support_count > b.support_count;
    if (a.antecedent.size() != b.antecedent.size()) return a.antecedent.size() < b.antecedent.size();
    return std::tie(a.antecedent, a.consequent) < std::tie(b.antecedent, b.consequent);
  });
}

/// Non-root, non-redundant nodes meeting the confidence threshold (and whose
/// joint support meets min_support) become rules, sorted by descending
/// confidence then descending support.
inline std::vector<BehavioralRule> extract_rules(const AGTNode& root, double min_confidence,
                                                 std::uint64_t min_support = 1) {
  const Ratio threshold = threshold_ratio(min_confidence);
  std::vector<BehavioralRule> rules;
  std::vector<const AGTNode*> stack;
  for (const auto& c : root.children) stack.push_back(&c);
  while (!stack.empty()) {
    const AGTNode* n = stack.back();
    stack.pop_back();
    const auto joint = n->distribution.count(n->dominant);
    if (!n->redundant && n->confidence >= threshold && joint >= min_support)
      rules.push_back({n->context_path, n->dominant, joint, n->support_count, n->confidence, n->id});
    for (const auto& c : n->children) stack.push_back(&c);
  }
  sort_rules(rules);
  return rules;
}

struct MiningResult {
  std::vector<Attribute> precedence;
  AGTNode root;
  std::vector<BehavioralRule> rules;
};

inline MiningResult mine_rules(std::span<const EventBehaviorInstance> rows, const MiningConfig& cfg) {
  if (rows.empty()) throw ContractViolation("cannot mine an empty instance list");
  miner_detail::TreeBuilder builder(rows, cfg);
  MiningResult out;
  out.root = builder.build();
  out.precedence = cfg.precedence == PrecedenceMode::Global ? builder.global_order()
                                                            : rank_contexts(rows, kAttributes, cfg.min_support);
  out.rules = extract_rules(out.root, cfg.min_confidence, cfg.min_support);
  return out;
}

/// Indented dump of the tree, one node per line, redundant nodes suffixed
/// REDUNDANT.
inline std::string tree_to_text(const AGTNode& root) {
  std::string out;
  auto line = [&](const AGTNode& n, int depth, auto&& self) -> void {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (n.context_path.empty()) {
      out += "[root]";
    } else {
      out += "#" + std::to_string(n.id) + " " + to_string(n.context_path.back());
    }
    out += " -> " + std::string(to_string(n.dominant)) + " " + std::to_string(n.confidence.percent()) +
           "% (" + to_string(n.confidence) + ")";
    out += " [R:" + std::to_string(n.distribution.count(Behavior::Reject)) +
           " A:" + std::to_string(n.distribution.count(Behavior::Accept)) +
           " M:" + std::to_string(n.distribution.count(Behavior::Missed)) + "]";
    if (n.redundant) out += " REDUNDANT";
    out += '\n';
    for (const auto& c : n.children) self(c, depth + 1, self);
  };
  line(root, 0, line);
  return out;
}

}  // namespace calbehav
