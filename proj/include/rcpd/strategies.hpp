#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rcpd/rules.hpp"
#include "rcpd/trace.hpp"

namespace rcpd {

enum class StrategyKind {
  kFull,         // never truncate
  kBudgetForce,  // stop at the first boundary with cumulative tokens >= budget
  kNoThink,      // answer immediately, zero thinking tokens
  kThinkRank5,   // stop at the first boundary with eot_rank <= 5
  kDeer,         // stop at a trigger-word sentence with confident boxed answer
  kRcpd,         // stop when the rank-window rules fire
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kFull;
  std::optional<std::int64_t> budget_tokens;          // kBudgetForce
  std::optional<double> deer_confidence_threshold;    // kDeer, default 0.95
  std::optional<RuleSet> rules;                       // kRcpd
  Rank rank_cap = kDefaultRankCap;

  static StrategyConfig full();
  static StrategyConfig budget_force(std::int64_t budget);
  static StrategyConfig no_think();
  static StrategyConfig think_rank_5();
  static StrategyConfig deer(double threshold = 0.95);
  static StrategyConfig rcpd(RuleSet rules = default_rcpd_rules());

  /// Throws ValidationError when required parameters are missing or absurd.
  void validate() const;

  /// Stable label used in reports: "full", "budget_force(1000)", ...
  std::string display_name() const;
};

/// Parses a report label back into a config: "full", "no_think",
/// "budget_force" (budget via --budgets), "think_rank_5", "deer", "rcpd".
StrategyConfig strategy_from_name(const std::string& name);

struct StrategyOutcome {
  TruncateAt truncate_at;
  std::optional<std::string> fired_rule;  // kRcpd only
  std::int64_t think_tokens = 0;
  std::int64_t content_tokens = 0;
  std::int64_t total_tokens = 0;
  bool correct = false;
  bool looped = false;
};

/// Where the strategy cuts this trace. Decisions scan sentences in order
/// and take the first firing boundary; no firing means full().
TruncateAt decide_stop(const StrategyConfig& config,
                       const ReasoningTrace& trace);

/// The rank window visible at a sentence boundary: that sentence's rank
/// plus up to five preceding ranks, most recent first.
RankWindow window_at(const ReasoningTrace& trace, int sentence_index,
                     Rank rank_cap = kDefaultRankCap);

/// Applies decide_stop and prices the cut against recorded outcomes.
/// Throws ReplayError if the needed outcome was never recorded.
StrategyOutcome run_strategy(const StrategyConfig& config,
                             const ReasoningTrace& trace);

}  // namespace rcpd
