#pragma once

// Static calendar baselines.
//   BM1: any scheduled event means the user is unavailable (Reject).
//   BM2: a fixed keyword table over event names, with a default.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calbehav/core.hpp"
#include "calbehav/mapping.hpp"

namespace calbehav {

inline Behavior bm1_predict(const ContextVector* context) {
  return context ? Behavior::Reject : Behavior::Accept;
}

inline Behavior bm1_predict(const std::optional<ContextVector>& context) {
  return bm1_predict(context ? &*context : nullptr);
}

class KeywordRuleTable {
 public:
  explicit KeywordRuleTable(Behavior fallback = Behavior::Accept) : default_(fallback) {}

  /// Returns false if the keyword already exists after case folding.
  bool add(std::string_view keyword, Behavior b) {
    return keywords_.emplace(ascii_lower(trim(keyword)), b).second;
  }

  [[nodiscard]] Behavior default_behavior() const { return default_; }
  [[nodiscard]] const std::map<std::string, Behavior>& keywords() const { return keywords_; }

  /// Case-insensitive match of the whole name first, then of each word in it
  /// (so "Team Meeting" hits "meeting"). The first matching word wins.
  [[nodiscard]] std::optional<Behavior> lookup(std::string_view event_name) const {
    const auto folded = ascii_lower(trim(event_name));
    if (auto it = keywords_.find(folded); it != keywords_.end()) return it->second;
    std::string word;
    auto flush = [&]() -> std::optional<Behavior> {
      if (word.empty()) return std::nullopt;
      auto it = keywords_.find(word);
      word.clear();
      if (it != keywords_.end()) return it->second;
      return std::nullopt;
    };
    for (char c : folded) {
      const bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
      if (alnum) {
        word.push_back(c);
      } else if (auto hit = flush()) {
        return hit;
      }
    }
    return flush();
  }

 private:
  std::map<std::string, Behavior> keywords_;
  Behavior default_;
};

/// {meeting, lecture, seminar, appointment, class} -> Reject, otherwise Accept.
inline KeywordRuleTable default_keyword_table() {
  KeywordRuleTable t(Behavior::Accept);
  for (auto k : {"meeting", "lecture", "seminar", "appointment", "class"}) t.add(k, Behavior::Reject);
  return t;
}

inline Behavior bm2_predict(const ContextVector& context, const KeywordRuleTable& table) {
  return table.lookup(context.event_name).value_or(table.default_behavior());
}

}  // namespace calbehav
