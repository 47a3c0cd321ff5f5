#include "rcpd/rules.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "rcpd/errors.hpp"

namespace rcpd {

namespace {

bool within(Rank rank, Rank threshold, Rank cap) {
  // The cap value is the "deeper than top-K" sentinel; a sentinel rank
  // cannot be claimed to sit within any top-N.
  return rank < cap && rank <= threshold;
}

}  // namespace

RankWindow make_window(Rank current, std::span<const Rank> preceding,
                       Rank rank_cap) {
  RankWindow w;
  w.current = std::min(current, rank_cap);
  w.history.fill(rank_cap);
  const std::size_t n = std::min(preceding.size(), kHistoryLen);
  for (std::size_t i = 0; i < n; ++i) {
    w.history[i] = std::min(preceding[i], rank_cap);
  }
  return w;
}

void RuleSet::validate() const {
  std::set<std::string> ids;
  for (const auto& rule : rules) {
    if (rule.rule_id.empty()) {
      throw ValidationError("rule with empty rule_id");
    }
    if (!ids.insert(rule.rule_id).second) {
      throw ValidationError("duplicate rule_id: " + rule.rule_id);
    }
    if (rule.current_threshold == 0) {
      throw ValidationError("rule " + rule.rule_id +
                            ": current_threshold must be >= 1");
    }
    std::set<int> offsets;
    for (const auto& [offset, threshold] : rule.history_thresholds) {
      if (offset < 1 || offset > static_cast<int>(kHistoryLen)) {
        throw ValidationError("rule " + rule.rule_id + ": history offset " +
                              std::to_string(offset) + " outside 1..5");
      }
      if (!offsets.insert(offset).second) {
        throw ValidationError("rule " + rule.rule_id +
                              ": duplicate history offset " +
                              std::to_string(offset));
      }
      if (threshold == 0) {
        throw ValidationError("rule " + rule.rule_id +
                              ": history threshold must be >= 1");
      }
    }
  }
}

RuleSet default_rcpd_rules() {
  RuleSet rs;
  rs.rules = {
      {"R1", 5, {}},
      {"R2", 10, {{1, 50}, {2, 100}, {3, 1000}}},
      {"R3", 20, {{1, 20}, {2, 20}}},
      {"R4", 50, {{1, 50}, {2, 50}, {3, 50}, {4, 50}, {5, 50}}},
  };
  return rs;
}

StopDecision evaluate(const RankWindow& window, const RuleSet& rules,
                      Rank rank_cap) {
  for (const auto& rule : rules.rules) {
    if (!within(window.current, rule.current_threshold, rank_cap)) continue;
    bool all = true;
    for (const auto& [offset, threshold] : rule.history_thresholds) {
      if (!within(window.history[offset - 1], threshold, rank_cap)) {
        all = false;
        break;
      }
    }
    if (all) return {StopAction::kTerminateThinking, rule.rule_id};
  }
  return {StopAction::kContinue, std::nullopt};
}

RuleSet rules_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) {
    throw ParseError("rule config must be a JSON array of rules");
  }
  RuleSet rs;
  for (const auto& item : doc) {
    if (!item.is_object()) {
      throw ParseError("rule entry must be a JSON object");
    }
    StepRule rule;
    try {
      rule.rule_id = item.at("rule_id").get<std::string>();
      rule.current_threshold = item.at("current_threshold").get<Rank>();
      if (item.contains("history")) {
        for (const auto& pair : item.at("history")) {
          if (!pair.is_array() || pair.size() != 2) {
            throw ParseError("rule " + rule.rule_id +
                             ": history entries must be [offset, threshold]");
          }
          rule.history_thresholds.emplace_back(pair[0].get<int>(),
                                               pair[1].get<Rank>());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad rule entry: ") + e.what());
    }
    rs.rules.push_back(std::move(rule));
  }
  rs.validate();
  return rs;
}

nlohmann::json rules_to_json(const RuleSet& rules) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& rule : rules.rules) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& [offset, threshold] : rule.history_thresholds) {
      history.push_back({offset, threshold});
    }
    doc.push_back({{"rule_id", rule.rule_id},
                   {"current_threshold", rule.current_threshold},
                   {"history", std::move(history)}});
  }
  return doc;
}

RuleSet load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("rules file " + path + ": " + e.what());
  }
  return rules_from_json(doc);
}

void save_rules_file(const RuleSet& rules, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open rules file for writing: " + path);
  out << rules_to_json(rules).dump(2) << "\n";
}

}  // namespace rcpd
