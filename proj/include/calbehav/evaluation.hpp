#pragma once

// Rule quality metrics, best-match prediction, k-fold cross-validation and
// the three-way comparison against the static baselines.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calbehav/baselines.hpp"
#include "calbehav/miner.hpp"
#include "calbehav/random.hpp"

namespace calbehav {

/// 100 * correct / covered, or nullopt when the rule covers nothing.
inline std::optional<double> rule_accuracy(const BehavioralRule& rule,
                                           std::span<const EventBehaviorInstance> data) {
  std::uint64_t covers = 0, correct = 0;
  for (const auto& row : data) {
    if (!rule.covers(row.context)) continue;
    ++covers;
    if (row.behavior == rule.consequent) ++correct;
  }
  if (covers == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(covers);
}

inline double rule_coverage(const BehavioralRule& rule, std::span<const EventBehaviorInstance> data) {
  if (data.empty()) throw ContractViolation("coverage over an empty dataset");
  std::uint64_t covers = 0;
  for (const auto& row : data)
    if (rule.covers(row.context)) ++covers;
  return 100.0 * static_cast<double>(covers) / static_cast<double>(data.size());
}

/// Percentage of rows covered by at least one rule.
inline double union_coverage(std::span<const BehavioralRule> rules,
                             std::span<const EventBehaviorInstance> data) {
  if (data.empty()) throw ContractViolation("coverage over an empty dataset");
  std::uint64_t covered = 0;
  for (const auto& row : data) {
    for (const auto& r : rules) {
      if (r.covers(row.context)) {
        ++covered;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(covered) / static_cast<double>(data.size());
}

/// Most specific satisfied rule; ties go to higher confidence, then higher
/// support, then the earlier rule in the list.
inline const BehavioralRule* match_rule(std::span<const BehavioralRule> rules, const ContextVector& ctx) {
  const BehavioralRule* best = nullptr;
  for (const auto& r : rules) {
    if (!r.covers(ctx)) continue;
    if (!best) {
      best = &r;
      continue;
    }
    if (r.antecedent.size() != best->antecedent.size()) {
      if (r.antecedent.size() > best->antecedent.size()) best = &r;
    } else if (r.confidence != best->confidence) {
      if (r.confidence > best->confidence) best = &r;
    } else if (r.support_count > best->support_count) {
      best = &r;
    }
  }
  return best;
}

struct ErrorTally {
  std::uint64_t matched = 0;
  std::uint64_t incorrect = 0;
  std::uint64_t uncovered = 0;

  /// 100 * incorrect / matched; nullopt when nothing was matched.
  [[nodiscard]] std::optional<double> rate() const {
    if (matched == 0) return std::nullopt;
    return 100.0 * static_cast<double>(incorrect) / static_cast<double>(matched);
  }
  [[nodiscard]] std::uint64_t total() const { return matched + uncovered; }
};

using Predictor = std::function<std::optional<Behavior>(const ContextVector&)>;

inline ErrorTally tally_predictions(std::span<const EventBehaviorInstance> test, const Predictor& predict) {
  ErrorTally t;
  for (const auto& row : test) {
    const auto p = predict(row.context);
    if (!p) {
      ++t.uncovered;
      continue;
    }
    ++t.matched;
    if (*p != row.behavior) ++t.incorrect;
  }
  return t;
}

/// Best-match error over test rows. Rows no rule covers are counted as
/// uncovered, not as errors.
inline ErrorTally error_rate(std::span<const BehavioralRule> rules,
                             std::span<const EventBehaviorInstance> test) {
  return tally_predictions(test, [&](const ContextVector& ctx) -> std::optional<Behavior> {
    if (const auto* r = match_rule(rules, ctx)) return r->consequent;
    return std::nullopt;
  });
}

/// Seeded shuffle, then contiguous blocks whose sizes differ by at most one
/// (the first n % k folds get the extra row). Each fold lists row indices in
/// ascending order.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k,
                                                             std::uint64_t seed) {
  if (k < 2) throw ContractViolation("k-fold cross-validation needs k >= 2");
  if (n < k) throw ContractViolation("fewer instances than folds");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

struct RuleMetrics {
  BehavioralRule rule;
  std::optional<double> accuracy;
  double coverage = 0.0;
};

struct FoldResult {
  std::size_t index = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t rule_count = 0;
  ErrorTally tally;
};

struct MetricsReport {
  std::string method;
  /// Rules mined on the full dataset, scored on it.
  std::vector<RuleMetrics> rules;
  std::size_t rule_count = 0;
  std::vector<FoldResult> folds;
  /// Mean of the defined per-fold error rates.
  std::optional<double> error_rate;
  double uncovered_rate = 0.0;
};

namespace eval_detail {

inline std::vector<EventBehaviorInstance> gather(std::span<const EventBehaviorInstance> rows,
                                                 const std::vector<std::size_t>& idx) {
  std::vector<EventBehaviorInstance> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(rows[i]);
  return out;
}

inline std::vector<EventBehaviorInstance> gather_except(std::span<const EventBehaviorInstance> rows,
                                                        const std::vector<std::vector<std::size_t>>& folds,
                                                        std::size_t skip) {
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != skip) idx.insert(idx.end(), folds[f].begin(), folds[f].end());
  std::sort(idx.begin(), idx.end());
  return gather(rows, idx);
}

inline void summarize(MetricsReport& r) {
  double sum = 0.0;
  std::size_t defined = 0;
  std::uint64_t uncovered = 0, total = 0;
  for (const auto& f : r.folds) {
    if (auto e = f.tally.rate()) {
      sum += *e;
      ++defined;
    }
    uncovered += f.tally.uncovered;
    total += f.tally.total();
  }
  r.error_rate = defined ? std::optional<double>(sum / static_cast<double>(defined)) : std::nullopt;
  r.uncovered_rate = total ? 100.0 * static_cast<double>(uncovered) / static_cast<double>(total) : 0.0;
}

}  // namespace eval_detail

inline std::vector<RuleMetrics> score_rules(std::span<const BehavioralRule> rules,
                                            std::span<const EventBehaviorInstance> data) {
  std::vector<RuleMetrics> out;
  for (const auto& r : rules) out.push_back({r, rule_accuracy(r, data), rule_coverage(r, data)});
  return out;
}

/// Mines on k-1 folds and scores best-match error on the held-out fold, for
/// each fold in turn.
inline MetricsReport k_fold_cv(std::span<const EventBehaviorInstance> rows,
                               const std::vector<std::vector<std::size_t>>& folds,
                               const MiningConfig& cfg) {
  MetricsReport report;
  report.method = "CalBehav";
  const auto full = mine_rules(rows, cfg);
  report.rules = score_rules(full.rules, rows);
  report.rule_count = full.rules.size();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto train = eval_detail::gather_except(rows, folds, f);
    const auto test = eval_detail::gather(rows, folds[f]);
    FoldResult fr{f, train.size(), test.size(), 0, {}};
    if (!train.empty()) {
      const auto mined = mine_rules(train, cfg);
      fr.rule_count = mined.rules.size();
      fr.tally = error_rate(mined.rules, test);
    } else {
      fr.tally.uncovered = test.size();
    }
    report.folds.push_back(fr);
  }
  eval_detail::summarize(report);
  return report;
}

inline MetricsReport k_fold_cv(std::span<const EventBehaviorInstance> rows, std::size_t k,
                               const MiningConfig& cfg, std::uint64_t seed) {
  return k_fold_cv(rows, kfold_partition(rows.size(), k, seed), cfg);
}

/// A static predictor scored on the same held-out folds. Nothing is trained.
inline MetricsReport evaluate_static(std::string method, std::span<const EventBehaviorInstance> rows,
                                     const std::vector<std::vector<std::size_t>>& folds,
                                     const Predictor& predict) {
  MetricsReport report;
  report.method = std::move(method);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto test = eval_detail::gather(rows, folds[f]);
    report.folds.push_back({f, rows.size() - test.size(), test.size(), 0, tally_predictions(test, predict)});
  }
  eval_detail::summarize(report);
  return report;
}

struct CompareConfig {
  MiningConfig mining;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  KeywordRuleTable keywords = default_keyword_table();
};

/// CalBehav, BM1 and BM2 on one shared fold partition, in that order.
inline std::vector<MetricsReport> compare_methods(std::span<const EventBehaviorInstance> rows,
                                                  const CompareConfig& cfg) {
  const auto folds = kfold_partition(rows.size(), cfg.folds, cfg.seed);
  std::vector<MetricsReport> out;
  out.push_back(k_fold_cv(rows, folds, cfg.mining));
  // Every mapped row lies inside a scheduled event.
  out.push_back(evaluate_static("BM1", rows, folds, [](const ContextVector& ctx) -> std::optional<Behavior> {
    return bm1_predict(&ctx);
  }));
  out.push_back(evaluate_static("BM2", rows, folds, [&](const ContextVector& ctx) -> std::optional<Behavior> {
    return bm2_predict(ctx, cfg.keywords);
  }));
  return out;
}

struct TradeoffPoint {
  double threshold = 0.0;
  std::size_t rule_count = 0;
  /// Percentage of rows covered by at least one rule.
  double coverage = 0.0;
  /// Mean training accuracy of the rules; nullopt with no rules.
  std::optional<double> mean_accuracy;
  std::optional<Ratio> min_confidence;
};

/// Mines at each threshold and reports the coverage/accuracy trade-off on
/// the training rows.
inline std::vector<TradeoffPoint> tradeoff_sweep(std::span<const EventBehaviorInstance> rows,
                                                 std::span<const double> thresholds,
                                                 MiningConfig cfg) {
  std::vector<TradeoffPoint> out;
  for (double t : thresholds) {
    cfg.min_confidence = t;
    const auto mined = mine_rules(rows, cfg);
    TradeoffPoint p;
    p.threshold = t;
    p.rule_count = mined.rules.size();
    p.coverage = union_coverage(mined.rules, rows);
    if (!mined.rules.empty()) {
      double sum = 0.0;
      for (const auto& r : mined.rules) sum += rule_accuracy(r, rows).value_or(0.0);
      p.mean_accuracy = sum / static_cast<double>(mined.rules.size());
      p.min_confidence = mined.rules.back().confidence;
      for (const auto& r : mined.rules)
        if (r.confidence < *p.min_confidence) p.min_confidence = r.confidence;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace calbehav
