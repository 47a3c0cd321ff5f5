#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rcpd {

/// 1-based rank of the end-of-thinking token in a next-token distribution.
using Rank = std::uint32_t;

/// Ranks deeper than the cap are recorded as the cap itself, so the cap
/// value doubles as the "beyond top-K" sentinel. A sentinel rank never
/// satisfies any threshold.
inline constexpr Rank kDefaultRankCap = 1024;

/// Preceding sentence-boundary ranks kept alongside the current one.
inline constexpr std::size_t kHistoryLen = 5;

/// Rank at the current sentence boundary plus up to five preceding boundary
/// ranks, most recent first. Missing slots hold the cap sentinel.
struct RankWindow {
  Rank current = kDefaultRankCap;
  std::array<Rank, kHistoryLen> history{kDefaultRankCap, kDefaultRankCap,
                                        kDefaultRankCap, kDefaultRankCap,
                                        kDefaultRankCap};
  bool operator==(const RankWindow&) const = default;
};

/// Builds a window from a current rank and preceding ranks (most recent
/// first). Ranks are clamped to the cap; absent slots get the sentinel.
RankWindow make_window(Rank current, std::span<const Rank> preceding,
                       Rank rank_cap = kDefaultRankCap);

/// One conjunction: current rank within current_threshold AND, for each
/// (offset, threshold) pair, the rank `offset` sentences back within
/// threshold. Offsets are 1..5; "within top N" means rank <= N.
struct StepRule {
  std::string rule_id;
  Rank current_threshold = 1;
  std::vector<std::pair<int, Rank>> history_thresholds;
  bool operator==(const StepRule&) const = default;
};

/// Ordered disjunction of step rules; evaluation is first-match-wins.
struct RuleSet {
  std::vector<StepRule> rules;
  bool operator==(const RuleSet&) const = default;

  /// Throws ValidationError on duplicate ids, empty ids, zero thresholds,
  /// offsets outside 1..5, or duplicate offsets within a rule.
  void validate() const;
};

enum class StopAction { kContinue, kTerminateThinking };

struct StopDecision {
  StopAction action = StopAction::kContinue;
  /// Set iff action is kTerminateThinking.
  std::optional<std::string> fired_rule;
  bool operator==(const StopDecision&) const = default;
};

/// The four default stop rules, in evaluation order:
///   R1: current <= 5
///   R2: current <= 10 and previous three <= 50, 100, 1000
///   R3: current and previous two <= 20
///   R4: current and previous five <= 50
RuleSet default_rcpd_rules();

/// First-match-wins evaluation. A rank equal to rank_cap is the sentinel
/// and satisfies nothing.
StopDecision evaluate(const RankWindow& window, const RuleSet& rules,
                      Rank rank_cap = kDefaultRankCap);

/// Rule config format: a JSON array of
///   {"rule_id": "R1", "current_threshold": 5, "history": [[1, 50], ...]}
/// where each history entry is an [offset, threshold] pair.
RuleSet rules_from_json(const nlohmann::json& doc);
nlohmann::json rules_to_json(const RuleSet& rules);
RuleSet load_rules_file(const std::string& path);
void save_rules_file(const RuleSet& rules, const std::string& path);

}  // namespace rcpd
