#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <vector>

#include "rcpd/errors.hpp"
#include "rcpd/rng.hpp"
#include "rcpd/rules.hpp"
#include "support/fixtures.hpp"
#include "support/rule_oracle.hpp"

using namespace rcpd;
using testing::OracleWindow;
using testing::oracle_evaluate;

namespace {

RankWindow window(Rank current, std::vector<Rank> prev) {
  return make_window(current, prev);
}

constexpr Rank MAX = kDefaultRankCap;

}  // namespace

TEST_CASE("default rule set structure") {
  const RuleSet rules = default_rcpd_rules();
  REQUIRE(rules.rules.size() == 4);

  CHECK(rules.rules[0].rule_id == "R1");
  CHECK(rules.rules[0].current_threshold == 5);
  CHECK(rules.rules[0].history_thresholds.empty());

  CHECK(rules.rules[1].rule_id == "R2");
  CHECK(rules.rules[1].current_threshold == 10);
  REQUIRE(rules.rules[1].history_thresholds.size() == 3);
  CHECK(rules.rules[1].history_thresholds[0] == std::pair{1, Rank{50}});
  CHECK(rules.rules[1].history_thresholds[1] == std::pair{2, Rank{100}});
  CHECK(rules.rules[1].history_thresholds[2] == std::pair{3, Rank{1000}});

  CHECK(rules.rules[2].rule_id == "R3");
  CHECK(rules.rules[2].current_threshold == 20);
  REQUIRE(rules.rules[2].history_thresholds.size() == 2);
  CHECK(rules.rules[2].history_thresholds[0] == std::pair{1, Rank{20}});
  CHECK(rules.rules[2].history_thresholds[1] == std::pair{2, Rank{20}});

  CHECK(rules.rules[3].rule_id == "R4");
  CHECK(rules.rules[3].current_threshold == 50);
  REQUIRE(rules.rules[3].history_thresholds.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(rules.rules[3].history_thresholds[k] == std::pair{k + 1, Rank{50}});
  }

  CHECK_NOTHROW(rules.validate());
}

TEST_CASE("pinned decision examples") {
  const RuleSet rules = default_rcpd_rules();

  auto fired = [&](Rank cur, std::vector<Rank> prev) {
    return evaluate(window(cur, std::move(prev)), rules).fired_rule;
  };

  CHECK(fired(4, {MAX, MAX, MAX, MAX, MAX}) == "R1");
  CHECK(fired(5, {}) == "R1");  // boundary, no history needed
  CHECK(fired(8, {42, 90, 800, MAX, MAX}) == "R2");
  CHECK(fired(10, {50, 100, 1000}) == "R2");  // every R2 bound inclusive
  CHECK(fired(15, {18, 19, MAX, MAX, MAX}) == "R3");
  CHECK(fired(20, {20, 20}) == "R3");
  CHECK(fired(45, {50, 49, 48, 47, 46}) == "R4");
  CHECK(fired(50, {50, 50, 50, 50, 50}) == "R4");

  CHECK(fired(6, {60, 90, 900, 60, 60}) == std::nullopt);
  CHECK(fired(MAX, {1, 1, 1, 1, 1}) == std::nullopt);  // all rules gate on current
  CHECK(fired(51, {1, 1, 1, 1, 1}) == std::nullopt);
  CHECK(fired(1, {1, 1, 1, 1, 1}) == "R1");
}

TEST_CASE("sentinel rank satisfies nothing") {
  const RuleSet rules = default_rcpd_rules();
  // With cap 8, rank 8 means "beyond the recorded top-K", so current = 8
  // must not count as within the top 50 even though 8 <= 50.
  const RankWindow w = make_window(8, std::vector<Rank>{7, 7, 7, 7, 7}, 8);
  CHECK(evaluate(w, rules, 8).action == StopAction::kContinue);
  // A sentinel one sentence back blocks every history rule the same way.
  const RankWindow w2 = make_window(7, std::vector<Rank>{8, 7, 7, 7, 7}, 8);
  CHECK(evaluate(w2, rules, 8).action == StopAction::kContinue);
  // The default cap leaves rank 8 an ordinary value.
  CHECK(evaluate(window(8, {7, 7, 7, 8, 7}), rules).fired_rule == "R2");
}

TEST_CASE("missing history blocks history rules, not R1") {
  const RuleSet rules = default_rcpd_rules();
  // Sentence 0: empty history = sentinel everywhere.
  CHECK(evaluate(window(3, {}), rules).fired_rule == "R1");
  CHECK(evaluate(window(8, {}), rules).action == StopAction::kContinue);
  CHECK(evaluate(window(15, {18}), rules).action == StopAction::kContinue);
  CHECK(evaluate(window(15, {18, 19}), rules).fired_rule == "R3");
}

TEST_CASE("first match wins in rule order") {
  const RuleSet rules = default_rcpd_rules();
  // Satisfies R1, R2, R3 and R4 simultaneously; R1 is reported.
  CHECK(evaluate(window(5, {5, 5, 5, 5, 5}), rules).fired_rule == "R1");
  // Satisfies R2 and R4; R2 is reported.
  CHECK(evaluate(window(10, {50, 50, 50, 50, 50}), rules).fired_rule == "R2");
  // Satisfies R3 and R4 only.
  CHECK(evaluate(window(20, {20, 20, 50, 50, 50}), rules).fired_rule == "R3");

  // Rule order in the set decides attribution, not definition order.
  RuleSet reversed;
  reversed.rules = {default_rcpd_rules().rules[3], default_rcpd_rules().rules[0]};
  CHECK(evaluate(window(5, {5, 5, 5, 5, 5}), reversed).fired_rule == "R4");
}

TEST_CASE("decision depends only on the six window slots") {
  const RuleSet rules = default_rcpd_rules();
  // make_window ignores preceding ranks past five.
  std::vector<Rank> six{50, 50, 50, 50, 50, 1};
  std::vector<Rank> five{50, 50, 50, 50, 50};
  CHECK(make_window(50, six) == make_window(50, five));
  CHECK(evaluate(make_window(50, six), rules).fired_rule == "R4");
}

TEST_CASE("engine agrees with the brute-force oracle on a focused grid") {
  // The full 14^6 enumeration lives in the acceptance binary; here a dense
  // grid over current x prev[0] x prev[1] with the deeper slots swept
  // coarsely keeps unit runtime small while covering every boundary.
  const RuleSet rules = default_rcpd_rules();
  static constexpr Rank kGrid[] = {1, 5, 6, 10, 11, 20, 21,
                                   50, 51, 100, 101, 1000, 1001, MAX};
  for (Rank cur : kGrid) {
    for (Rank p0 : kGrid) {
      for (Rank p1 : kGrid) {
        for (Rank p2 : {Rank{50}, Rank{1000}, Rank{1001}, MAX}) {
          for (Rank p4 : {Rank{50}, Rank{51}, MAX}) {
            const Rank p3 = p2;
            OracleWindow ow{cur, {p0, p1, p2, p3, p4}};
            RankWindow w = window(cur, {p0, p1, p2, p3, p4});
            const auto expect = oracle_evaluate(ow, MAX);
            const auto got = evaluate(w, rules);
            CHECK(got.fired_rule == expect);
            CHECK((got.action == StopAction::kTerminateThinking) ==
                  expect.has_value());
          }
        }
      }
    }
  }
}

TEST_CASE("terminate is downward-closed in rank") {
  const RuleSet rules = default_rcpd_rules();
  Rng rng(2024);
  int terminated = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto ranks = testing::random_ranks(rng, 6, MAX);
    RankWindow w = window(ranks[0], {ranks[1], ranks[2], ranks[3], ranks[4], ranks[5]});
    if (evaluate(w, rules).action != StopAction::kTerminateThinking) continue;
    ++terminated;
    RankWindow lower = w;
    lower.current = static_cast<Rank>(rng.uniform_int(1, lower.current));
    for (auto& h : lower.history) h = static_cast<Rank>(rng.uniform_int(1, h));
    CHECK(evaluate(lower, rules).action == StopAction::kTerminateThinking);
  }
  CHECK(terminated > 1000);  // the generator must actually exercise the property
}

TEST_CASE("rule set validation rejects malformed sets") {
  RuleSet rs = default_rcpd_rules();
  rs.rules[1].rule_id = "R1";  // duplicate id
  CHECK_THROWS_AS(rs.validate(), ValidationError);

  rs = default_rcpd_rules();
  rs.rules[0].rule_id = "";
  CHECK_THROWS_AS(rs.validate(), ValidationError);

  rs = default_rcpd_rules();
  rs.rules[0].current_threshold = 0;
  CHECK_THROWS_AS(rs.validate(), ValidationError);

  rs = default_rcpd_rules();
  rs.rules[1].history_thresholds[0].first = 6;  // offset out of 1..5
  CHECK_THROWS_AS(rs.validate(), ValidationError);

  rs = default_rcpd_rules();
  rs.rules[1].history_thresholds[1].first = 1;  // duplicate offset
  CHECK_THROWS_AS(rs.validate(), ValidationError);
}

TEST_CASE("rules round-trip through json and files") {
  const RuleSet rules = default_rcpd_rules();
  const auto doc = rules_to_json(rules);
  CHECK(rules_from_json(doc) == rules);

  const auto path = testing::temp_file("rules") += ".json";
  save_rules_file(rules, path.string());
  CHECK(load_rules_file(path.string()) == rules);
  std::filesystem::remove(path);
}
