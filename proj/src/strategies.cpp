#include "rcpd/strategies.hpp"

#include <algorithm>

#include "rcpd/errors.hpp"

namespace rcpd {

StrategyConfig StrategyConfig::full() { return {}; }

StrategyConfig StrategyConfig::budget_force(std::int64_t budget) {
  StrategyConfig c;
  c.kind = StrategyKind::kBudgetForce;
  c.budget_tokens = budget;
  return c;
}

StrategyConfig StrategyConfig::no_think() {
  StrategyConfig c;
  c.kind = StrategyKind::kNoThink;
  return c;
}

StrategyConfig StrategyConfig::think_rank_5() {
  StrategyConfig c;
  c.kind = StrategyKind::kThinkRank5;
  return c;
}

StrategyConfig StrategyConfig::deer(double threshold) {
  StrategyConfig c;
  c.kind = StrategyKind::kDeer;
  c.deer_confidence_threshold = threshold;
  return c;
}

StrategyConfig StrategyConfig::rcpd(RuleSet rules) {
  StrategyConfig c;
  c.kind = StrategyKind::kRcpd;
  c.rules = std::move(rules);
  return c;
}

void StrategyConfig::validate() const {
  switch (kind) {
    case StrategyKind::kBudgetForce:
      if (!budget_tokens || *budget_tokens <= 0) {
        throw ValidationError("budget_force needs a positive token budget");
      }
      break;
    case StrategyKind::kDeer: {
      const double t = deer_confidence_threshold.value_or(0.95);
      if (t < 0.0 || t > 1.0) {
        throw ValidationError("deer confidence threshold outside [0,1]");
      }
      break;
    }
    case StrategyKind::kRcpd:
      if (!rules || rules->rules.empty()) {
        throw ValidationError("rcpd needs a non-empty rule set");
      }
      rules->validate();
      break;
    default:
      break;
  }
}

std::string StrategyConfig::display_name() const {
  switch (kind) {
    case StrategyKind::kFull:
      return "full";
    case StrategyKind::kBudgetForce:
      return "budget_force(" + std::to_string(budget_tokens.value_or(0)) + ")";
    case StrategyKind::kNoThink:
      return "no_think";
    case StrategyKind::kThinkRank5:
      return "think_rank_5";
    case StrategyKind::kDeer: {
      std::string t = std::to_string(deer_confidence_threshold.value_or(0.95));
      t.erase(t.find_last_not_of('0') + 1);
      if (!t.empty() && t.back() == '.') t.pop_back();
      return "deer(" + t + ")";
    }
    case StrategyKind::kRcpd:
      return "rcpd";
  }
  return "unknown";
}

StrategyConfig strategy_from_name(const std::string& name) {
  if (name == "full") return StrategyConfig::full();
  if (name == "no_think") return StrategyConfig::no_think();
  if (name == "budget_force") return StrategyConfig::budget_force(1000);
  if (name == "think_rank_5") return StrategyConfig::think_rank_5();
  if (name == "deer") return StrategyConfig::deer();
  if (name == "rcpd") return StrategyConfig::rcpd();
  throw ValidationError("unknown strategy: \"" + name + "\"");
}

RankWindow window_at(const ReasoningTrace& trace, int sentence_index,
                     Rank rank_cap) {
  const auto n = static_cast<int>(trace.sentences.size());
  if (sentence_index < 0 || sentence_index >= n) {
    throw ValidationError("trace " + trace.trace_id + ": sentence index " +
                          std::to_string(sentence_index) + " out of range");
  }
  std::vector<Rank> preceding;
  preceding.reserve(kHistoryLen);
  for (int back = 1; back <= static_cast<int>(kHistoryLen); ++back) {
    const int i = sentence_index - back;
    if (i < 0) break;
    preceding.push_back(trace.sentences[i].eot_rank);
  }
  return make_window(trace.sentences[sentence_index].eot_rank, preceding,
                     rank_cap);
}

namespace {

struct StopDetail {
  TruncateAt at;
  std::optional<std::string> fired_rule;
};

StopDetail decide_stop_detail(const StrategyConfig& config,
                              const ReasoningTrace& trace) {
  config.validate();
  switch (config.kind) {
    case StrategyKind::kFull:
      return {TruncateAt::full(), std::nullopt};

    case StrategyKind::kNoThink:
      return {TruncateAt::at(0), std::nullopt};

    case StrategyKind::kBudgetForce:
      for (const auto& s : trace.sentences) {
        if (s.think_tokens_cum >= *config.budget_tokens) {
          return {TruncateAt::at(s.index), std::nullopt};
        }
      }
      return {TruncateAt::full(), std::nullopt};

    case StrategyKind::kThinkRank5:
      for (const auto& s : trace.sentences) {
        if (s.eot_rank <= 5) return {TruncateAt::at(s.index), std::nullopt};
      }
      return {TruncateAt::full(), std::nullopt};

    case StrategyKind::kDeer: {
      const bool has_probe =
          std::any_of(trace.sentences.begin(), trace.sentences.end(),
                      [](const SentenceRecord& s) {
                        return s.boxed_confidence.has_value();
                      });
      if (!has_probe) {
        throw ReplayError(
            "strategy inapplicable to corpus: trace " + trace.trace_id +
            " carries no boxed_confidence probes needed by deer");
      }
      const double threshold = config.deer_confidence_threshold.value_or(0.95);
      for (const auto& s : trace.sentences) {
        if (s.trigger_word && s.boxed_confidence &&
            *s.boxed_confidence >= threshold) {
          return {TruncateAt::at(s.index), std::nullopt};
        }
      }
      return {TruncateAt::full(), std::nullopt};
    }

    case StrategyKind::kRcpd: {
      const RuleSet& rules =
          config.rules ? *config.rules : default_rcpd_rules();
      for (const auto& s : trace.sentences) {
        const auto decision =
            evaluate(window_at(trace, s.index, config.rank_cap), rules,
                     config.rank_cap);
        if (decision.action == StopAction::kTerminateThinking) {
          return {TruncateAt::at(s.index), decision.fired_rule};
        }
      }
      return {TruncateAt::full(), std::nullopt};
    }
  }
  throw ValidationError("unknown strategy kind");
}

}  // namespace

TruncateAt decide_stop(const StrategyConfig& config,
                       const ReasoningTrace& trace) {
  return decide_stop_detail(config, trace).at;
}

StrategyOutcome run_strategy(const StrategyConfig& config,
                             const ReasoningTrace& trace) {
  const StopDetail detail = decide_stop_detail(config, trace);
  const TruncationOutcome& recorded = lookup_outcome(trace, detail.at);
  StrategyOutcome out;
  out.truncate_at = detail.at;
  out.fired_rule = detail.fired_rule;
  out.think_tokens = trace.think_tokens_at(detail.at);
  out.content_tokens = recorded.content_tokens;
  out.total_tokens = out.think_tokens + out.content_tokens;
  out.correct = recorded.correct;
  out.looped = recorded.looped;
  return out;
}

}  // namespace rcpd
